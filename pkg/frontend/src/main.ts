// Studio bootstrap: wire the sliders to the controller and render into the
// page. Serve the compiled bundle next to the resetloop service (same
// origin) or set window.RESETLOOP_BASE to point elsewhere.

import { HttpServiceClient } from './api'
import { DomRenderer } from './dom'
import { StudioController } from './studio'
import { PARAM_LIMITS } from './types'

declare global {
  interface Window {
    RESETLOOP_BASE?: string
  }
}

function bind(controller: StudioController, doc: Document): void {
  const sliders: [string, (v: number) => Partial<Parameters<StudioController['onParamChange']>[0]>][] = [
    ['omega-l', (v) => ({ omegaL: v })],
    ['a-rho', (v) => ({ aRho: v })],
    ['c-f', (v) => ({ cF: v })],
  ]
  for (const [id, toChange] of sliders) {
    const input = doc.getElementById(id) as HTMLInputElement
    const label = doc.getElementById(`${id}-value`)!
    input.addEventListener('input', () => {
      const value = parseFloat(input.value)
      label.textContent = input.value
      const blocked = controller.onParamChange(toChange(value))
      if (blocked) {
        input.title = blocked
      } else {
        input.title = ''
      }
    })
  }
  const notchInputs = ['notch-omega', 'notch-q1', 'notch-q2'].map(
    (id) => doc.getElementById(id) as HTMLInputElement)
  for (const input of notchInputs) {
    input.addEventListener('change', () => {
      controller.onParamChange({
        notch: {
          omega_n: parseFloat(notchInputs[0].value),
          q1: parseFloat(notchInputs[1].value),
          q2: parseFloat(notchInputs[2].value),
        },
      })
    })
  }
  doc.getElementById('undo')!.addEventListener('click', () => controller.undo())
  doc.getElementById('store')!.addEventListener('click', () => {
    const label = `design ${controller.storedDesigns.length + 1}`
    if (controller.storeCurrent(label)) {
      const list = doc.getElementById('stored-list')!
      const item = doc.createElement('label')
      item.innerHTML = `<input type="checkbox" value="${label}" checked> ${label}`
      list.appendChild(item)
    }
  })
  doc.getElementById('compare')!.addEventListener('click', () => {
    const checked = Array.from(
      doc.querySelectorAll<HTMLInputElement>('#stored-list input:checked'))
    controller.compareView(checked.map((c) => c.value))
  })
  const aRho = doc.getElementById('a-rho') as HTMLInputElement
  aRho.min = String(PARAM_LIMITS.aRho.min)
  aRho.max = String(PARAM_LIMITS.aRho.max)
  aRho.title = 'reset value lives on the open interval (-1, 1)'
}

export function start(doc: Document): StudioController {
  const base = window.RESETLOOP_BASE ?? ''
  const controller = new StudioController(
    new HttpServiceClient(base),
    new DomRenderer(doc),
    {
      omegaL: 50.0,
      aRho: 0.0,
      cF: 1.0,
      notch: { omega_n: 5.0, q1: 1.0, q2: 2.0 },
    },
  )
  bind(controller, doc)
  void controller.refresh()
  return controller
}

if (typeof document !== 'undefined') {
  window.addEventListener('DOMContentLoaded', () => start(document))
}
