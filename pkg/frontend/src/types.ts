// Wire types for the resetloop JSON service. Angles are radians on the
// wire; the UI converts to degrees for display only.

export interface NotchParams {
  omega_n: number
  q1: number
  q2: number
}

export interface DesignRequest {
  notches: NotchParams[]
  omega_l: number
  a_rho: number
  c_f?: number
  omega_c?: number | null
  c1_notch_indices?: number[]
  check_resets?: boolean
}

export interface DesignInfo {
  omega_l: number
  omega_f: number
  A_rho: number
  c_f: number
  derived: { omega_r: number; k_c: number; D_r: number }
}

export interface RobustnessReport {
  Ms_db: number
  Mr_db: number
  omega_res: number
  Ms_limit_db: number
  Mr_limit_db: number
  Ms_pass: boolean
  Mr_pass: boolean
  modulus_margin: number
}

export interface CurvesPayload {
  omega: number[]
  s_lin_mag: number[]
  s_inf: number[]
  delta_s_pct: (number | null)[]
  truncated: boolean[]
}

export interface DfPayload {
  omega: number[]
  c1_mag: number[]
  c1_phase: number[]
  c3_mag: number[]
  harmonic_ratio_pct: number[]
}

export interface NotchDelta {
  omega_n: number
  delta_s_pct: number
}

export interface DesignResponse {
  schema_version: number
  kind: string
  design: DesignInfo | null
  theta_required: number | null
  theta_available: number | null
  omega_c: number | null
  verdict: 'pass' | 'fail'
  report: RobustnessReport
  delta_at_notches: NotchDelta[]
  curves: CurvesPayload
  df: DfPayload | null
  reset_check: { omega: number; resets_per_period: number | null; ok: boolean | null }[] | null
}

export interface ServiceError {
  schema_version: number
  error: {
    code: string
    message: string
    field?: string
    theta?: number
    theta_max?: number
    omega?: number
  }
}

export interface StudioParams {
  omegaL: number
  aRho: number
  cF: number
  notch: NotchParams
}

export const PARAM_LIMITS = {
  // the reset value lives on the open interval (-1, 1): the slider blocks
  // the extremes rather than sending an invalid request
  aRho: { min: -0.99, max: 0.99 },
  cF: { min: 1.0, max: 1.1 },
} as const

export function toDegrees(rad: number): number {
  return (rad * 180.0) / Math.PI
}
