/** Wire types mirroring the teaching service's JSON payloads. */

export interface ObjectAttributes {
  color?: string
  shape?: string
  x: number
  y: number
  [key: string]: unknown
}

export interface ScenePayloadObject {
  object_id: string
  features: number[]
  attributes: ObjectAttributes
}

export interface ScenePayload {
  scene_id: string
  objects: ScenePayloadObject[]
}

export interface DistributionEntry {
  object_id: string
  probability: number
}

export interface SceneResponse {
  response_id: string
  scene_index: number
  scene: ScenePayload
  session_id?: string
}

export interface PreviewResponse {
  response_id: string
  scene_id: string
  tokens: string[]
  distribution: DistributionEntry[]
}

export interface TeachResponse {
  response_id: string
  interaction_index: number
  scene_id: string
  frame_seed: number
  pre: DistributionEntry[]
  post: DistributionEntry[]
}

export interface LogInteraction {
  index: number
  scene_index: number
  scene_id: string
  tokens: string[]
  gold_object_id: string
  frame_seed: number
  pre: DistributionEntry[]
  post: DistributionEntry[]
  timestamp: string
}

export interface LogResponse {
  session_id: string
  interactions: LogInteraction[]
}

/** Overlay shown on the canvas: the service's numbers, byte for byte. */
export interface Overlay {
  responseId: string
  kind: 'preview' | 'teach-pre' | 'teach-post'
  entries: DistributionEntry[]
}
