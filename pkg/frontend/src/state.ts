// Studio state: parameter set, the last COMPLETED service response, the
// pending-request flag, and a bounded undo stack of parameter sets.

import type { DesignResponse, StudioParams } from './types'

export const HISTORY_LIMIT = 50

export class StudioState {
  params: StudioParams
  lastResponse: DesignResponse | null = null
  pending = false
  private history: StudioParams[] = []

  constructor(initial: StudioParams) {
    this.params = { ...initial, notch: { ...initial.notch } }
  }

  /** Record the current params on the undo stack and apply a change. */
  apply(change: Partial<StudioParams>): void {
    this.history.push(snapshot(this.params))
    if (this.history.length > HISTORY_LIMIT) {
      this.history.shift()
    }
    this.params = { ...this.params, ...change, notch: { ...(change.notch ?? this.params.notch) } }
  }

  undo(): boolean {
    const prev = this.history.pop()
    if (!prev) return false
    this.params = prev
    return true
  }

  get historyDepth(): number {
    return this.history.length
  }

  /** Badges and charts always come from here, never from a stale mix. */
  complete(response: DesignResponse): void {
    this.lastResponse = response
    this.pending = false
  }
}

function snapshot(p: StudioParams): StudioParams {
  return { ...p, notch: { ...p.notch } }
}
