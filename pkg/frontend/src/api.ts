/** Thin typed client over the teaching service's JSON endpoints. */

import type {
  LogResponse,
  PreviewResponse,
  SceneResponse,
  TeachResponse,
} from './types'

export class ServiceError extends Error {
  constructor(
    message: string,
    readonly status: number | null,
  ) {
    super(message)
  }
}

async function request<T>(
  base: string,
  method: 'GET' | 'POST',
  path: string,
  body?: unknown,
): Promise<T> {
  let response: Response
  try {
    response = await fetch(base + path, {
      method,
      headers: body === undefined ? {} : { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    })
  } catch (err) {
    throw new ServiceError(`service unreachable: ${String(err)}`, null)
  }
  if (!response.ok) {
    let detail = response.statusText
    try {
      const parsed = (await response.json()) as { detail?: string }
      if (parsed.detail) detail = parsed.detail
    } catch {
      // keep the status text
    }
    throw new ServiceError(detail, response.status)
  }
  return (await response.json()) as T
}

export class TeachClient {
  constructor(readonly base: string) {}

  createSession(body: {
    seed?: number
    preset?: string
    objects_per_scene?: number
  }): Promise<SceneResponse> {
    return request(this.base, 'POST', '/sessions', body)
  }

  getScene(sessionId: string): Promise<SceneResponse> {
    return request(this.base, 'GET', `/sessions/${sessionId}/scene`)
  }

  preview(sessionId: string, tokens: string[]): Promise<PreviewResponse> {
    return request(this.base, 'POST', `/sessions/${sessionId}/preview`, { tokens })
  }

  teach(
    sessionId: string,
    tokens: string[],
    goldObjectId: string,
  ): Promise<TeachResponse> {
    return request(this.base, 'POST', `/sessions/${sessionId}/teach`, {
      tokens,
      gold_object_id: goldObjectId,
    })
  }

  nextScene(sessionId: string): Promise<SceneResponse> {
    return request(this.base, 'POST', `/sessions/${sessionId}/next-scene`)
  }

  getLog(sessionId: string): Promise<LogResponse> {
    return request(this.base, 'GET', `/sessions/${sessionId}/log`)
  }
}
