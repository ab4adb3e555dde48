/** Queue view model: the server sends entries ordered by fused acquisition
 * score, highest first; re-sorting locally keeps refreshes stable even if
 * entries arrive out of order. */

import type { QueueEntryDto } from './types.js';

export interface QueueRow {
  imageId: string;
  rank: number;
  fusedScore: number;
  thumbnailUrl: string;
  proposalCount: number;
}

export function sortQueue(entries: QueueEntryDto[]): QueueEntryDto[] {
  return [...entries].sort((a, b) => {
    if (a.fused_score !== b.fused_score) return b.fused_score - a.fused_score;
    return a.image_id < b.image_id ? -1 : a.image_id > b.image_id ? 1 : 0;
  });
}

export function toRows(entries: QueueEntryDto[]): QueueRow[] {
  return sortQueue(entries).map((entry, index) => ({
    imageId: entry.image_id,
    rank: index + 1,
    fusedScore: entry.fused_score,
    thumbnailUrl: entry.uri,
    proposalCount: entry.proposals.length,
  }));
}
