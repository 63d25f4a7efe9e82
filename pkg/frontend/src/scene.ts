/** Scene geometry: mapping service coordinates onto the canvas and hit-testing.
 *
 * Object positions arrive in [-1, 1] x [-1, 1] (y up); the canvas uses pixels
 * (y down). The UI never interprets feature vectors — only the renderable
 * attributes the service sends.
 */

import type { ScenePayload, ScenePayloadObject } from './types'

export const OBJECT_RADIUS_PX = 26

export interface CanvasSize {
  width: number
  height: number
}

export function toCanvas(
  x: number,
  y: number,
  size: CanvasSize,
): { px: number; py: number } {
  const margin = OBJECT_RADIUS_PX + 8
  const px = margin + ((x + 1) / 2) * (size.width - 2 * margin)
  const py = margin + ((1 - y) / 2) * (size.height - 2 * margin)
  return { px, py }
}

export function objectCenter(obj: ScenePayloadObject, size: CanvasSize) {
  return toCanvas(obj.attributes.x, obj.attributes.y, size)
}

/** Topmost object under the pointer, or null when the click misses them all. */
export function hitTest(
  scene: ScenePayload,
  clickX: number,
  clickY: number,
  size: CanvasSize,
): string | null {
  for (let i = scene.objects.length - 1; i >= 0; i--) {
    const obj = scene.objects[i]
    const { px, py } = objectCenter(obj, size)
    const dx = clickX - px
    const dy = clickY - py
    if (dx * dx + dy * dy <= OBJECT_RADIUS_PX * OBJECT_RADIUS_PX) {
      return obj.object_id
    }
  }
  return null
}
