import { describe, expect, it } from 'vitest';

import { sortQueue, toRows } from '../src/queue.js';
import { keyToCommand } from '../src/keyboard.js';
import type { QueueEntryDto } from '../src/types.js';

function entry(id: string, fused: number): QueueEntryDto {
  return {
    image_id: id,
    rank: 0,
    fused_score: fused,
    beta_md: 0.5,
    beta_iu: 0.5,
    width: 640,
    height: 480,
    uri: `/api/images/${id}`,
    proposals: [],
  };
}

describe('sortQueue', () => {
  it('orders by fused score descending, ties by image id', () => {
    const sorted = sortQueue([
      entry('img_b', 0.4),
      entry('img_c', 0.9),
      entry('img_a', 0.4),
    ]);
    expect(sorted.map((e) => e.image_id)).toEqual(['img_c', 'img_a', 'img_b']);
  });

  it('does not mutate its input', () => {
    const input = [entry('b', 0.1), entry('a', 0.9)];
    sortQueue(input);
    expect(input[0]?.image_id).toBe('b');
  });
});

describe('toRows', () => {
  it('renders one row per entry with 1-based ranks', () => {
    const rows = toRows([entry('a', 0.9), entry('b', 0.4), entry('c', 0.1)]);
    expect(rows).toHaveLength(3);
    expect(rows.map((r) => r.rank)).toEqual([1, 2, 3]);
    expect(rows[0]?.thumbnailUrl).toBe('/api/images/a');
  });

  it('renders an empty queue as zero rows', () => {
    expect(toRows([])).toEqual([]);
  });
});

describe('keyToCommand', () => {
  it('maps number keys to classes with 0 meaning class 9', () => {
    expect(keyToCommand({ key: '1' })).toEqual({ kind: 'set-class', classId: 0 });
    expect(keyToCommand({ key: '9' })).toEqual({ kind: 'set-class', classId: 8 });
    expect(keyToCommand({ key: '0' })).toEqual({ kind: 'set-class', classId: 9 });
  });

  it('maps editing keys', () => {
    expect(keyToCommand({ key: ' ' })).toEqual({ kind: 'toggle-quality' });
    expect(keyToCommand({ key: 's' })).toEqual({ kind: 'keep' });
    expect(keyToCommand({ key: 'x' })).toEqual({ kind: 'discard' });
    expect(keyToCommand({ key: 'Enter' })).toEqual({ kind: 'submit' });
    expect(keyToCommand({ key: 'z', ctrlKey: true })).toEqual({ kind: 'undo' });
    expect(keyToCommand({ key: 'n' })).toEqual({ kind: 'add-class' });
  });

  it('ignores unmapped keys and modified letters', () => {
    expect(keyToCommand({ key: 'q' })).toBeNull();
    expect(keyToCommand({ key: 's', ctrlKey: true })).toBeNull();
  });
});
