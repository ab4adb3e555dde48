/** Shared types mirroring the annotation service's JSON API. */

/** Axis-aligned box as [xMin, yMin, xMax, yMax] in image pixels. */
export type Box = [number, number, number, number];

/** Which model produced a proposal: D3 = teacher, D4 = student. */
export type ProposalSource = 'D3' | 'D4';

export interface ProposalDto {
  box: Box;
  class_id: number;
  source: ProposalSource;
  confidence: number;
}

export interface QueueEntryDto {
  image_id: string;
  rank: number;
  fused_score: number;
  beta_md: number;
  beta_iu: number;
  width: number;
  height: number;
  uri: string;
  proposals: ProposalDto[];
}

export interface StatusDto {
  t: number;
  pending: number;
  staged: number;
  budget: number;
  terminal: boolean;
  latest_report: {
    t: number;
    ap50: number;
    ap: number;
    cumulative_seconds: number;
  } | null;
  cumulative_seconds: number;
  num_classes: number;
  session_costs: Record<string, number>;
}

export interface AnnotationObjectDto {
  box: Box;
  class_id: number;
  quality: 0 | 1;
}

export type ActionKind = 'selected' | 'drawn' | 'removed';

export interface ActionDto {
  kind: ActionKind;
  seconds: number;
  proposal_index?: number;
  class_id?: number;
  quality?: 0 | 1;
}

export interface SubmissionDto {
  objects: AnnotationObjectDto[];
  actions: ActionDto[];
}

export interface SubmitResponseDto {
  image_id: string;
  staged: number;
  t: number;
  terminal: boolean;
}

export type LabelDto =
  | { kind: 'weak'; classes: number[] }
  | { kind: 'full'; objects: AnnotationObjectDto[] };

/** Annotation time constants, in seconds, matching the server's cost model. */
export const SELECT_SECONDS = 2.0;
export const DRAW_SECONDS = 34.5;

export function boxWidth(box: Box): number {
  return box[2] - box[0];
}

export function boxHeight(box: Box): number {
  return box[3] - box[1];
}
