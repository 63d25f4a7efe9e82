/** Canvas drawing: colored shapes at their positions with probability overlays. */

import { OBJECT_RADIUS_PX, objectCenter } from './scene'
import type { AppState } from './state'
import { overlayProbability } from './state'
import type { ScenePayloadObject } from './types'

const COLOR_CSS: Record<string, string> = {
  red: '#d6453a',
  green: '#3d9a4e',
  blue: '#3b6fd4',
  yellow: '#e0b62c',
  orange: '#e07e2c',
  purple: '#8d4fc9',
  brown: '#8a5a2b',
  gray: '#8c8c94',
}

function shapePath(ctx: CanvasRenderingContext2D, shape: string, r: number) {
  const polygon = (points: Array<[number, number]>) => {
    ctx.moveTo(points[0][0], points[0][1])
    for (let i = 1; i < points.length; i++) ctx.lineTo(points[i][0], points[i][1])
    ctx.closePath()
  }
  switch (shape) {
    case 'square':
      ctx.rect(-r, -r, 2 * r, 2 * r)
      break
    case 'triangle':
      polygon([[0, -r], [r, r], [-r, r]])
      break
    case 'diamond':
      polygon([[0, -r], [r, 0], [0, r], [-r, 0]])
      break
    case 'star': {
      const pts: Array<[number, number]> = []
      for (let i = 0; i < 10; i++) {
        const angle = -Math.PI / 2 + (i * Math.PI) / 5
        const radius = i % 2 === 0 ? r : r / 2.4
        pts.push([radius * Math.cos(angle), radius * Math.sin(angle)])
      }
      polygon(pts)
      break
    }
    case 'cross': {
      const a = r / 2.6
      polygon([
        [-a, -r], [a, -r], [a, -a], [r, -a], [r, a], [a, a],
        [a, r], [-a, r], [-a, a], [-r, a], [-r, -a], [-a, -a],
      ])
      break
    }
    default:
      ctx.arc(0, 0, r, 0, 2 * Math.PI)
  }
}

function drawObject(
  ctx: CanvasRenderingContext2D,
  obj: ScenePayloadObject,
  px: number,
  py: number,
  probability: number | null,
  picked: boolean,
) {
  ctx.save()
  ctx.translate(px, py)

  if (probability !== null) {
    // overlay ring scaled by the service's probability, displayed untouched
    ctx.beginPath()
    ctx.arc(0, 0, OBJECT_RADIUS_PX + 7, 0, 2 * Math.PI)
    ctx.strokeStyle = `rgba(30, 110, 220, ${0.15 + 0.85 * probability})`
    ctx.lineWidth = 2 + 8 * probability
    ctx.stroke()
  }

  ctx.beginPath()
  shapePath(ctx, String(obj.attributes.shape ?? 'circle'), OBJECT_RADIUS_PX * 0.78)
  ctx.fillStyle = COLOR_CSS[String(obj.attributes.color ?? '')] ?? '#5fa8a0'
  ctx.fill()
  ctx.lineWidth = picked ? 4 : 1.5
  ctx.strokeStyle = picked ? '#111' : '#555'
  ctx.stroke()

  if (probability !== null) {
    ctx.fillStyle = '#111'
    ctx.font = '12px system-ui, sans-serif'
    ctx.textAlign = 'center'
    ctx.fillText(probability.toPrecision(3), 0, OBJECT_RADIUS_PX + 20)
  }
  ctx.restore()
}

export function renderScene(canvas: HTMLCanvasElement, state: AppState) {
  const ctx = canvas.getContext('2d')
  if (!ctx) return
  ctx.clearRect(0, 0, canvas.width, canvas.height)
  ctx.fillStyle = '#fafafa'
  ctx.fillRect(0, 0, canvas.width, canvas.height)
  if (!state.scene) return
  const size = { width: canvas.width, height: canvas.height }
  for (const obj of state.scene.objects) {
    const { px, py } = objectCenter(obj, size)
    drawObject(
      ctx,
      obj,
      px,
      py,
      overlayProbability(state, obj.object_id),
      state.goldPick === obj.object_id,
    )
  }
}
