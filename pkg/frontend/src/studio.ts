// The studio controller: parameter changes trigger a debounced design
// request; responses are correlated by a monotonically increasing token so
// a stale response can never overwrite a newer one; badges and charts
// update atomically from the last completed response.

import { ServiceClient, ServiceValidationError } from './api'
import { debounce } from './debounce'
import { badgesFrom, CompareEntry, FeasibilityGauge, RenderSink } from './render'
import { StudioState } from './state'
import type { DesignRequest, DesignResponse, StudioParams, ServiceError } from './types'
import { PARAM_LIMITS, toDegrees } from './types'

export const DEBOUNCE_MS = 150

export interface StoredDesign {
  label: string
  response: DesignResponse
}

export class StudioController {
  readonly state: StudioState
  private token = 0
  private lastCompletedToken = 0
  private stored: StoredDesign[] = []
  private issue: (params: StudioParams) => void

  constructor(
    private client: ServiceClient,
    private sink: RenderSink,
    initial: StudioParams,
    debounceMs: number = DEBOUNCE_MS,
  ) {
    this.state = new StudioState(initial)
    this.issue = debounce((params: StudioParams) => {
      void this.request(params)
    }, debounceMs)
  }

  /** Widget callback: validate locally-representable range limits only
   * (the open reset-value interval), everything else goes to the service. */
  onParamChange(change: Partial<StudioParams>): string | null {
    if (change.aRho !== undefined &&
        (change.aRho < PARAM_LIMITS.aRho.min || change.aRho > PARAM_LIMITS.aRho.max)) {
      return `reset value must stay inside (-1, 1); slider is clamped to ` +
        `[${PARAM_LIMITS.aRho.min}, ${PARAM_LIMITS.aRho.max}]`
    }
    this.state.apply(change)
    this.state.pending = true
    this.sink.setPending(true)
    this.issue(this.state.params)
    return null
  }

  undo(): void {
    if (this.state.undo()) {
      this.state.pending = true
      this.sink.setPending(true)
      this.issue(this.state.params)
    }
  }

  /** Issue the request immediately (bypasses the debounce; used by tests
   * and by the initial page load). */
  async refresh(): Promise<void> {
    await this.request(this.state.params)
  }

  private buildRequest(params: StudioParams): DesignRequest {
    return {
      notches: [params.notch],
      omega_l: params.omegaL,
      a_rho: params.aRho,
      c_f: params.cF,
    }
  }

  private async request(params: StudioParams): Promise<void> {
    const myToken = ++this.token
    try {
      const response = await this.client.design(this.buildRequest(params))
      if (myToken <= this.lastCompletedToken) return // stale: discard
      this.lastCompletedToken = myToken
      this.state.complete(response)
      this.sink.clearBanner()
      this.sink.clearFieldErrors()
      this.sink.setPending(false)
      this.sink.renderResponse(response, badgesFrom(response.report, response.verdict),
                               gaugeFrom(response))
    } catch (err) {
      if (myToken <= this.lastCompletedToken) return
      this.lastCompletedToken = myToken
      this.state.pending = false
      this.sink.setPending(false)
      if (err instanceof ServiceValidationError) {
        this.renderServiceError(err.payload)
      } else {
        this.sink.showFieldError('service', String(err))
      }
    }
  }

  private renderServiceError(payload: ServiceError): void {
    const error = payload.error
    if (error.code === 'infeasible_phase' && error.theta_max !== undefined) {
      this.sink.showInfeasibleBanner(toDegrees(error.theta_max), error.message)
      return
    }
    this.sink.showFieldError(error.field ?? 'request', error.message)
  }

  // -- comparison view ------------------------------------------------------

  storeCurrent(label: string): boolean {
    if (!this.state.lastResponse) return false
    this.stored.push({ label, response: this.state.lastResponse })
    return true
  }

  get storedDesigns(): readonly StoredDesign[] {
    return this.stored
  }

  /** Overlay the improvement-indicator curves and tabulate the report
   * metrics of the selected stored designs. */
  compareView(labels: string[]): void {
    const entries: CompareEntry[] = []
    for (const label of labels) {
      const found = this.stored.find((d) => d.label === label)
      if (!found) continue
      const r = found.response
      entries.push({
        label,
        omega: r.curves.omega,
        deltaS: r.curves.delta_s_pct,
        verdict: r.verdict,
        msDb: r.report.Ms_db,
        mrDb: r.report.Mr_db,
        deltas: r.delta_at_notches,
      })
    }
    if (entries.length === 0) {
      this.sink.renderComparePlaceholder()
      return
    }
    this.sink.renderCompare(entries)
  }
}

function gaugeFrom(response: DesignResponse): FeasibilityGauge | null {
  if (response.theta_required === null || response.theta_available === null) {
    return null
  }
  return {
    requiredDeg: toDegrees(response.theta_required),
    availableDeg: toDegrees(response.theta_available),
  }
}
