/** Pure session state and transitions; all rendering reads from this.
 *
 * Invariants enforced here:
 *  - overlay entries are the service's distribution, unmodified (no
 *    client-side renormalization, no reordering)
 *  - stale previews (an older request resolving after a newer one) never
 *    overwrite the current overlay
 *  - teach is possible only with a gold pick, a non-empty expression, no
 *    teach already in flight, and a reachable service
 */

import type { Overlay, PreviewResponse, ScenePayload, TeachResponse } from './types'

export interface LogLine {
  responseId: string
  text: string
}

export interface AppState {
  sessionId: string | null
  scene: ScenePayload | null
  expression: string
  goldPick: string | null
  overlay: Overlay | null
  teachInFlight: boolean
  banner: string | null
  logLines: LogLine[]
  lastPreviewRequest: number
  appliedPreviewRequest: number
}

export function initialState(): AppState {
  return {
    sessionId: null,
    scene: null,
    expression: '',
    goldPick: null,
    overlay: null,
    teachInFlight: false,
    banner: null,
    logLines: [],
    lastPreviewRequest: 0,
    appliedPreviewRequest: 0,
  }
}

export function tokenize(expression: string): string[] {
  return expression.split(/\s+/).filter((t) => t.length > 0)
}

export function canTeach(state: AppState): boolean {
  return (
    state.sessionId !== null &&
    state.scene !== null &&
    state.goldPick !== null &&
    tokenize(state.expression).length > 0 &&
    !state.teachInFlight &&
    state.banner === null
  )
}

export function setScene(state: AppState, scene: ScenePayload): AppState {
  // a new scene invalidates the pick and any displayed distribution
  return { ...state, scene, goldPick: null, overlay: null }
}

export function pickObject(state: AppState, objectId: string | null): AppState {
  if (objectId === null) return { ...state, goldPick: null }
  if (!state.scene || !state.scene.objects.some((o) => o.object_id === objectId)) {
    return state
  }
  return { ...state, goldPick: objectId }
}

export function beginPreview(state: AppState): { state: AppState; requestId: number } {
  const requestId = state.lastPreviewRequest + 1
  return { state: { ...state, lastPreviewRequest: requestId }, requestId }
}

export function applyPreview(
  state: AppState,
  requestId: number,
  response: PreviewResponse,
): AppState {
  if (requestId <= state.appliedPreviewRequest) {
    return state // superseded by a newer keystroke
  }
  return {
    ...state,
    appliedPreviewRequest: requestId,
    overlay: {
      responseId: response.response_id,
      kind: 'preview',
      entries: response.distribution,
    },
    logLines: [
      ...state.logLines,
      {
        responseId: response.response_id,
        text: `preview "${response.tokens.join(' ')}"`,
      },
    ],
  }
}

export function beginTeach(state: AppState): AppState {
  return { ...state, teachInFlight: true }
}

export function applyTeach(state: AppState, response: TeachResponse): AppState {
  return {
    ...state,
    teachInFlight: false,
    goldPick: null,
    overlay: {
      responseId: response.response_id,
      kind: 'teach-post',
      entries: response.post,
    },
    logLines: [
      ...state.logLines,
      {
        responseId: response.response_id,
        text: `teach #${response.interaction_index} (frame seed ${response.frame_seed})`,
      },
    ],
  }
}

export function serviceUnreachable(state: AppState, message: string): AppState {
  // teach is non-idempotent: surface a blocking banner, never retry silently
  return { ...state, teachInFlight: false, banner: message }
}

export function clearBanner(state: AppState): AppState {
  return { ...state, banner: null }
}

export function overlayProbability(state: AppState, objectId: string): number | null {
  if (!state.overlay) return null
  const entry = state.overlay.entries.find((e) => e.object_id === objectId)
  return entry ? entry.probability : null
}
