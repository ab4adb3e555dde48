/** Keyboard-first editing: the 2-second-per-box select target is unreachable
 * with mouse-only flows, so every frequent edit has a key. Number keys assign
 * classes, space toggles quality, and the mapping itself is pure so it can be
 * tested without a DOM. */

export type Command =
  | { kind: 'set-class'; classId: number }
  | { kind: 'toggle-quality' }
  | { kind: 'keep' }
  | { kind: 'discard' }
  | { kind: 'undo' }
  | { kind: 'submit' }
  | { kind: 'next-box' }
  | { kind: 'prev-box' }
  | { kind: 'add-class' }
  | { kind: 'clear-selection' };

export interface KeyStroke {
  key: string;
  ctrlKey?: boolean;
  metaKey?: boolean;
}

export function keyToCommand(stroke: KeyStroke): Command | null {
  const modifier = Boolean(stroke.ctrlKey) || Boolean(stroke.metaKey);
  if (modifier) {
    return stroke.key.toLowerCase() === 'z' ? { kind: 'undo' } : null;
  }
  if (/^[0-9]$/.test(stroke.key)) {
    // 1..9 map to classes 0..8, 0 maps to class 9
    const digit = Number(stroke.key);
    return { kind: 'set-class', classId: digit === 0 ? 9 : digit - 1 };
  }
  switch (stroke.key) {
    case ' ':
      return { kind: 'toggle-quality' };
    case 'Enter':
      return { kind: 'submit' };
    case 's':
      return { kind: 'keep' };
    case 'x':
    case 'Delete':
    case 'Backspace':
      return { kind: 'discard' };
    case 'Tab':
    case 'j':
      return { kind: 'next-box' };
    case 'k':
      return { kind: 'prev-box' };
    case 'n':
      return { kind: 'add-class' };
    case 'Escape':
      return { kind: 'clear-selection' };
    default:
      return null;
  }
}
