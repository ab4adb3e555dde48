/** Thin typed client over the annotation service's JSON endpoints. */

import type {
  LabelDto,
  QueueEntryDto,
  StatusDto,
  SubmissionDto,
  SubmitResponseDto,
} from './types.js';

export type FetchLike = (
  input: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(`request failed with status ${status}: ${JSON.stringify(detail)}`);
    this.name = 'ApiError';
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchImpl: FetchLike = fetch as unknown as FetchLike,
  ) {}

  private async request<T>(path: string, init?: Parameters<FetchLike>[1]): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      throw new ApiError(response.status, body && (body as { detail?: unknown }).detail);
    }
    return body as T;
  }

  getQueue(): Promise<QueueEntryDto[]> {
    return this.request<QueueEntryDto[]>('/api/queue');
  }

  getStatus(): Promise<StatusDto> {
    return this.request<StatusDto>('/api/status');
  }

  getLabel(imageId: string): Promise<LabelDto> {
    return this.request<LabelDto>(`/api/labels/${imageId}`);
  }

  imageUrl(imageId: string): string {
    return `${this.baseUrl}/api/images/${imageId}`;
  }

  submit(imageId: string, submission: SubmissionDto): Promise<SubmitResponseDto> {
    return this.request<SubmitResponseDto>(`/api/annotations/${imageId}`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(submission),
    });
  }
}
