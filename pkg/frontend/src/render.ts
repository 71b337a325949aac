// Rendering contract. The controller talks to this interface; the browser
// implementation draws DOM/SVG, the test implementation records calls.
// One completed response produces exactly one atomic render.

import type { DesignResponse, NotchDelta, RobustnessReport } from './types'

export interface BadgeStates {
  msPass: boolean
  mrPass: boolean
  verdictPass: boolean
}

export interface FeasibilityGauge {
  requiredDeg: number
  availableDeg: number
}

export interface CompareEntry {
  label: string
  omega: number[]
  deltaS: (number | null)[]
  verdict: string
  msDb: number
  mrDb: number
  deltas: NotchDelta[]
}

export interface RenderSink {
  /** Atomic update from one completed response. */
  renderResponse(response: DesignResponse, badges: BadgeStates, gauge: FeasibilityGauge | null): void
  showInfeasibleBanner(maxFeasibleDeg: number, message: string): void
  clearBanner(): void
  showFieldError(field: string, message: string): void
  clearFieldErrors(): void
  setPending(pending: boolean): void
  renderCompare(entries: CompareEntry[]): void
  renderComparePlaceholder(): void
}

export function badgesFrom(report: RobustnessReport, verdict: string): BadgeStates {
  return {
    msPass: report.Ms_pass,
    mrPass: report.Mr_pass,
    verdictPass: verdict === 'pass',
  }
}
