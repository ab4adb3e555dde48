import { describe, expect, it } from 'vitest';

import { ApiClient, ApiError, type FetchLike } from '../src/api.js';

function fakeFetch(
  responses: Record<string, { status: number; body: unknown }>,
  calls: Array<{ url: string; init?: unknown }> = [],
): FetchLike {
  return async (url, init) => {
    calls.push({ url, init });
    const match = responses[url];
    if (!match) throw new Error(`unexpected request to ${url}`);
    return {
      ok: match.status < 400,
      status: match.status,
      json: async () => match.body,
    };
  };
}

describe('ApiClient', () => {
  it('fetches and returns the queue', async () => {
    const queue = [{ image_id: 'a', rank: 1 }];
    const api = new ApiClient(
      'http://host',
      fakeFetch({ 'http://host/api/queue': { status: 200, body: queue } }),
    );
    await expect(api.getQueue()).resolves.toEqual(queue);
  });

  it('posts submissions as JSON', async () => {
    const calls: Array<{ url: string; init?: unknown }> = [];
    const api = new ApiClient(
      '',
      fakeFetch(
        { '/api/annotations/img': { status: 200, body: { staged: 1 } } },
        calls,
      ),
    );
    await api.submit('img', { objects: [], actions: [] });
    const init = calls[0]?.init as { method: string; body: string };
    expect(init.method).toBe('POST');
    expect(JSON.parse(init.body)).toEqual({ objects: [], actions: [] });
  });

  it('wraps HTTP failures in ApiError with the detail payload', async () => {
    const api = new ApiClient(
      '',
      fakeFetch({
        '/api/queue': { status: 409, body: { detail: 'no pending batch' } },
      }),
    );
    const error = await api.getQueue().catch((e: unknown) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect((error as ApiError).status).toBe(409);
    expect((error as ApiError).detail).toBe('no pending batch');
  });

  it('builds image URLs against the base', () => {
    const api = new ApiClient('http://host:8000');
    expect(api.imageUrl('img_1')).toBe('http://host:8000/api/images/img_1');
  });
});
