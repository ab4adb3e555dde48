/** Canvas rendering for the box editor. Pure drawing over an EditorSession;
 * all state lives in the session so this file stays a view. */

import type { EditorSession, WorkingBox } from './session.js';
import type { Box } from './types.js';

const CLASS_COLORS = [
  '#e6194b', '#3cb44b', '#4363d8', '#f58231', '#911eb4',
  '#46f0f0', '#f032e6', '#bcf60c', '#fabebe', '#008080',
];

export function classColor(classId: number): string {
  return CLASS_COLORS[classId % CLASS_COLORS.length] ?? '#888888';
}

export interface DrawOptions {
  /** Box ids in the current multi-selection, drawn with a thicker stroke. */
  selectedIds?: ReadonlySet<number>;
  /** Active (keyboard-focused) box id. */
  focusedId?: number | null;
}

export function drawEditor(
  ctx: CanvasRenderingContext2D,
  image: CanvasImageSource,
  session: EditorSession,
  options: DrawOptions = {},
): void {
  const canvas = ctx.canvas;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.drawImage(image, 0, 0, canvas.width, canvas.height);
  for (const box of session.visibleBoxes()) {
    drawBox(ctx, box, options);
  }
}

function drawBox(
  ctx: CanvasRenderingContext2D,
  working: WorkingBox,
  options: DrawOptions,
): void {
  const [x0, y0, x1, y1] = working.box;
  const selected = options.selectedIds?.has(working.id) ?? false;
  const focused = options.focusedId === working.id;
  ctx.save();
  ctx.strokeStyle = classColor(working.classId);
  ctx.lineWidth = selected || focused ? 3 : working.kept ? 2 : 1;
  if (!working.kept) ctx.setLineDash([4, 3]);
  ctx.strokeRect(x0, y0, x1 - x0, y1 - y0);
  ctx.font = '11px sans-serif';
  ctx.fillStyle = ctx.strokeStyle;
  const badge =
    working.source === 'drawn'
      ? `c${working.classId}`
      : `c${working.classId} ${working.source}`;
  const quality = working.kept ? (working.quality === 1 ? ' P' : ' I') : '';
  ctx.fillText(badge + quality, x0 + 2, Math.max(10, y0 - 3));
  ctx.restore();
}

/** Hit test in canvas coordinates: topmost (last drawn) box wins. */
export function hitTest(session: EditorSession, x: number, y: number): WorkingBox | null {
  const visible = session.visibleBoxes();
  for (let i = visible.length - 1; i >= 0; i--) {
    const box = visible[i];
    if (box && contains(box.box, x, y)) return box;
  }
  return null;
}

function contains(box: Box, x: number, y: number): boolean {
  return x >= box[0] && x <= box[2] && y >= box[1] && y <= box[3];
}
