/** Wiring: DOM events -> state transitions -> render.
 *
 * The client is stateless beyond the session id (kept in the URL hash);
 * reloading resumes by fetching the current scene and the interaction log.
 */

import { TeachClient, ServiceError } from './api'
import { hitTest } from './scene'
import {
  AppState,
  applyPreview,
  applyTeach,
  beginPreview,
  beginTeach,
  canTeach,
  clearBanner,
  initialState,
  pickObject,
  serviceUnreachable,
  setScene,
  tokenize,
} from './state'
import { renderScene } from './render'

const SERVICE_BASE = (window as { WACLEX_SERVICE?: string }).WACLEX_SERVICE ?? 'http://127.0.0.1:8075'

const client = new TeachClient(SERVICE_BASE)
let state: AppState = initialState()

const canvas = document.getElementById('scene') as HTMLCanvasElement
const expressionInput = document.getElementById('expression') as HTMLInputElement
const teachButton = document.getElementById('teach') as HTMLButtonElement
const nextButton = document.getElementById('next-scene') as HTMLButtonElement
const banner = document.getElementById('banner') as HTMLDivElement
const logPanel = document.getElementById('log') as HTMLUListElement
const pickLabel = document.getElementById('pick-label') as HTMLSpanElement

function update(next: AppState) {
  state = next
  renderScene(canvas, state)
  teachButton.disabled = !canTeach(state)
  banner.textContent = state.banner ?? ''
  banner.style.display = state.banner ? 'block' : 'none'
  pickLabel.textContent = state.goldPick ?? 'none (click an object)'
  logPanel.replaceChildren(
    ...state.logLines.slice(-12).map((line) => {
      const li = document.createElement('li')
      li.textContent = `[${line.responseId}] ${line.text}`
      return li
    }),
  )
}

function fail(err: unknown) {
  const message = err instanceof ServiceError ? err.message : String(err)
  update(serviceUnreachable(state, message))
}

async function refreshPreview() {
  if (!state.sessionId) return
  const tokens = tokenize(expressionInput.value)
  const { state: begun, requestId } = beginPreview(state)
  update(begun)
  if (tokens.length === 0) {
    update({ ...state, overlay: null })
    return
  }
  try {
    const response = await client.preview(state.sessionId, tokens)
    update(applyPreview(state, requestId, response))
  } catch (err) {
    fail(err)
  }
}

async function boot() {
  try {
    const fromHash = window.location.hash.replace(/^#/, '')
    if (fromHash) {
      const sceneResp = await client.getScene(fromHash)
      const log = await client.getLog(fromHash)
      let next = setScene({ ...state, sessionId: fromHash }, sceneResp.scene)
      next = {
        ...next,
        logLines: log.interactions.map((it) => ({
          responseId: `log-${it.index}`,
          text: `teach #${it.index} "${it.tokens.join(' ')}" -> ${it.gold_object_id}`,
        })),
      }
      update(next)
      return
    }
    const created = await client.createSession({})
    window.location.hash = created.session_id ?? ''
    update(setScene({ ...state, sessionId: created.session_id ?? null }, created.scene))
  } catch (err) {
    fail(err)
  }
}

expressionInput.addEventListener('input', () => {
  update({ ...state, expression: expressionInput.value })
  void refreshPreview()
})

canvas.addEventListener('click', (event) => {
  if (!state.scene) return
  const rect = canvas.getBoundingClientRect()
  const hit = hitTest(
    state.scene,
    event.clientX - rect.left,
    event.clientY - rect.top,
    { width: canvas.width, height: canvas.height },
  )
  update(pickObject(state, hit))
})

teachButton.addEventListener('click', async () => {
  if (!canTeach(state) || !state.sessionId || !state.goldPick) return
  const tokens = tokenize(state.expression)
  const gold = state.goldPick
  update(beginTeach(state))
  try {
    const response = await client.teach(state.sessionId, tokens, gold)
    update(applyTeach(state, response))
  } catch (err) {
    fail(err) // teach is non-idempotent: banner, never a silent retry
  }
})

nextButton.addEventListener('click', async () => {
  if (!state.sessionId) return
  try {
    const response = await client.nextScene(state.sessionId)
    update(setScene(state, response.scene))
    expressionInput.value = ''
    update({ ...state, expression: '' })
  } catch (err) {
    fail(err)
  }
})

banner.addEventListener('click', () => update(clearBanner(state)))

void boot()
