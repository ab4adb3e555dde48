/** Local editing session for one queue entry.
 *
 * All edits are optimistic and local; the server only sees the final label
 * at submit time. The session tracks a working copy of every proposal plus
 * any boxes drawn from scratch, an undo stack, and the implied annotation
 * cost (select = 2 s, draw = 34.5 s, removals free).
 */

import type {
  ActionDto,
  Box,
  ProposalSource,
  QueueEntryDto,
  SubmissionDto,
} from './types.js';
import { boxHeight, boxWidth, DRAW_SECONDS, SELECT_SECONDS } from './types.js';

export const MIN_BOX_SIZE = 2;

export interface WorkingBox {
  id: number;
  box: Box;
  classId: number;
  /** 1 = precise, 0 = imprecise. Selections start imprecise; the annotator
   * upgrades deliberately. */
  quality: 0 | 1;
  /** Index into the entry's proposal list, or null for a drawn box. */
  proposalIndex: number | null;
  source: ProposalSource | 'drawn';
  /** Kept boxes end up in the submitted label. */
  kept: boolean;
}

interface Snapshot {
  boxes: WorkingBox[];
  numClasses: number;
}

export class EditorSession {
  readonly imageId: string;
  private boxes: WorkingBox[];
  private numClasses: number;
  private nextId = 0;
  private undoStack: Snapshot[] = [];
  private selection = new Set<number>();
  private hiddenClasses = new Set<number>();
  private readonly startedAt: number;

  constructor(
    entry: QueueEntryDto,
    numClasses: number,
    now: () => number = Date.now,
  ) {
    this.imageId = entry.image_id;
    this.numClasses = numClasses;
    this.startedAt = now();
    this.boxes = entry.proposals.map((proposal, index) => ({
      id: this.nextId++,
      box: [...proposal.box] as Box,
      classId: proposal.class_id,
      quality: 0,
      proposalIndex: index,
      source: proposal.source,
      kept: false,
    }));
  }

  // -- queries ---------------------------------------------------------------

  allBoxes(): readonly WorkingBox[] {
    return this.boxes;
  }

  visibleBoxes(): WorkingBox[] {
    return this.boxes.filter((b) => !this.hiddenClasses.has(b.classId));
  }

  keptBoxes(): WorkingBox[] {
    return this.boxes.filter((b) => b.kept);
  }

  classCount(): number {
    return this.numClasses;
  }

  selectedIds(): number[] {
    return [...this.selection].sort((a, b) => a - b);
  }

  elapsedSeconds(now: () => number = Date.now): number {
    return (now() - this.startedAt) / 1000;
  }

  // -- selection (multi-select batch editing) ---------------------------------

  toggleSelection(id: number): void {
    this.requireBox(id);
    if (this.selection.has(id)) this.selection.delete(id);
    else this.selection.add(id);
  }

  clearSelection(): void {
    this.selection.clear();
  }

  // -- class visibility filter -------------------------------------------------

  setClassVisible(classId: number, visible: boolean): void {
    if (visible) this.hiddenClasses.delete(classId);
    else this.hiddenClasses.add(classId);
  }

  isClassVisible(classId: number): boolean {
    return !this.hiddenClasses.has(classId);
  }

  // -- edits (all undoable) -----------------------------------------------------

  keepBox(id: number): void {
    const box = this.requireBox(id);
    this.pushUndo();
    box.kept = true;
  }

  discardBox(id: number): void {
    const box = this.requireBox(id);
    this.pushUndo();
    if (box.proposalIndex === null) {
      this.boxes = this.boxes.filter((b) => b.id !== id);
      this.selection.delete(id);
    } else {
      box.kept = false;
    }
  }

  drawBox(box: Box, classId: number): WorkingBox {
    if (boxWidth(box) < MIN_BOX_SIZE || boxHeight(box) < MIN_BOX_SIZE) {
      throw new Error(
        `drawn box must be at least ${MIN_BOX_SIZE}px in both dimensions`,
      );
    }
    this.requireClass(classId);
    this.pushUndo();
    const drawn: WorkingBox = {
      id: this.nextId++,
      box: [...box] as Box,
      classId,
      quality: 1,
      proposalIndex: null,
      source: 'drawn',
      kept: true,
    };
    this.boxes.push(drawn);
    return drawn;
  }

  setClass(id: number, classId: number): void {
    const box = this.requireBox(id);
    this.requireClass(classId);
    this.pushUndo();
    box.classId = classId;
  }

  toggleQuality(id: number): void {
    const box = this.requireBox(id);
    this.pushUndo();
    box.quality = box.quality === 1 ? 0 : 1;
  }

  /** Apply a class correction to the whole current selection at once. */
  setClassForSelection(classId: number): void {
    this.requireClass(classId);
    if (this.selection.size === 0) return;
    this.pushUndo();
    for (const box of this.boxes) {
      if (this.selection.has(box.id)) box.classId = classId;
    }
  }

  setQualityForSelection(quality: 0 | 1): void {
    if (this.selection.size === 0) return;
    this.pushUndo();
    for (const box of this.boxes) {
      if (this.selection.has(box.id)) box.quality = quality;
    }
  }

  /** The labeling task allows discovering new classes on the fly. */
  addClass(): number {
    this.pushUndo();
    return this.numClasses++;
  }

  undo(): boolean {
    const snapshot = this.undoStack.pop();
    if (!snapshot) return false;
    this.boxes = snapshot.boxes;
    this.numClasses = snapshot.numClasses;
    for (const id of [...this.selection]) {
      if (!this.boxes.some((b) => b.id === id)) this.selection.delete(id);
    }
    return true;
  }

  // -- submission ------------------------------------------------------------

  /** Problems that block submit; empty means the payload is valid. */
  validate(): string[] {
    const problems: string[] = [];
    const kept = this.keptBoxes();
    if (kept.length === 0) {
      problems.push('nothing to submit: keep at least one box or draw one');
    }
    for (const box of kept) {
      if (box.classId < 0 || box.classId >= this.numClasses) {
        problems.push(`box ${box.id} has out-of-range class ${box.classId}`);
      }
    }
    return problems;
  }

  /** Action log derived from the final state: one select or draw per kept
   * box, one free removal per discarded proposal. */
  actionLog(): ActionDto[] {
    const actions: ActionDto[] = [];
    for (const box of this.boxes) {
      if (!box.kept) continue;
      if (box.proposalIndex !== null) {
        actions.push({
          kind: 'selected',
          seconds: SELECT_SECONDS,
          proposal_index: box.proposalIndex,
          class_id: box.classId,
          quality: box.quality,
        });
      } else {
        actions.push({
          kind: 'drawn',
          seconds: DRAW_SECONDS,
          class_id: box.classId,
          quality: box.quality,
        });
      }
    }
    for (const box of this.boxes) {
      if (!box.kept && box.proposalIndex !== null) {
        actions.push({
          kind: 'removed',
          seconds: 0,
          proposal_index: box.proposalIndex,
        });
      }
    }
    return actions;
  }

  impliedCostSeconds(): number {
    return this.actionLog().reduce((sum, action) => sum + action.seconds, 0);
  }

  buildSubmission(): SubmissionDto {
    const problems = this.validate();
    if (problems.length > 0) {
      throw new Error(problems.join('; '));
    }
    return {
      objects: this.keptBoxes().map((box) => ({
        box: [...box.box] as Box,
        class_id: box.classId,
        quality: box.quality,
      })),
      actions: this.actionLog(),
    };
  }

  // -- internals ---------------------------------------------------------------

  private requireBox(id: number): WorkingBox {
    const box = this.boxes.find((b) => b.id === id);
    if (!box) throw new Error(`no box with id ${id}`);
    return box;
  }

  private requireClass(classId: number): void {
    if (!Number.isInteger(classId) || classId < 0 || classId >= this.numClasses) {
      throw new Error(`class ${classId} out of range [0, ${this.numClasses})`);
    }
  }

  private pushUndo(): void {
    this.undoStack.push({
      boxes: this.boxes.map((b) => ({ ...b, box: [...b.box] as Box })),
      numClasses: this.numClasses,
    });
  }
}
