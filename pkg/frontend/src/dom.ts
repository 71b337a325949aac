// Browser renderer: draws the charts, badges, gauge and banners into the
// studio page. Every displayed number is read from the service response.

import { renderChart } from './chart'
import type { BadgeStates, CompareEntry, FeasibilityGauge, RenderSink } from './render'
import type { DesignResponse } from './types'

export class DomRenderer implements RenderSink {
  constructor(private root: Document) {}

  private el(id: string): HTMLElement {
    const node = this.root.getElementById(id)
    if (!node) throw new Error(`missing element #${id}`)
    return node
  }

  renderResponse(response: DesignResponse, badges: BadgeStates,
                 gauge: FeasibilityGauge | null): void {
    const curves = response.curves
    this.el('chart-sensitivity').innerHTML = renderChart(
      [
        { x: curves.omega, y: curves.s_lin_mag, label: '|S| linear', dashed: true },
        { x: curves.omega, y: curves.s_inf, label: '|S_inf| reset' },
      ],
      { title: 'sensitivity', xLabel: 'omega (rad/s)', yLabel: 'dB', yDb: true },
    )
    this.el('chart-delta').innerHTML = renderChart(
      [{ x: curves.omega, y: curves.delta_s_pct, label: 'delta_s' }],
      { title: 'improvement indicator', xLabel: 'omega (rad/s)', yLabel: '%' },
    )
    if (response.df) {
      this.el('chart-df').innerHTML = renderChart(
        [
          { x: response.df.omega, y: response.df.c1_mag, label: 'first harmonic' },
          { x: response.df.omega, y: response.df.c3_mag, label: 'third harmonic', dashed: true },
        ],
        { title: 'filter describing functions', xLabel: 'omega (rad/s)', yLabel: 'dB', yDb: true },
      )
      this.el('chart-ratio').innerHTML = renderChart(
        [{ x: response.df.omega, y: response.df.harmonic_ratio_pct, label: '100*|c3|/|c1|' }],
        { title: 'harmonic ratio', xLabel: 'omega (rad/s)', yLabel: '%' },
      )
    }
    this.badge('badge-ms', badges.msPass,
               `Ms ${response.report.Ms_db.toFixed(2)} dB / ${response.report.Ms_limit_db} dB`)
    this.badge('badge-mr', badges.mrPass,
               `Mr ${response.report.Mr_db.toFixed(2)} dB / ${response.report.Mr_limit_db} dB`)
    this.badge('badge-verdict', badges.verdictPass, `verdict: ${response.verdict}`)
    const gaugeEl = this.el('phase-gauge')
    if (gauge) {
      const frac = Math.min(1, gauge.requiredDeg / Math.max(gauge.availableDeg, 1e-9))
      gaugeEl.innerHTML =
        `<div class="gauge-track"><div class="gauge-fill" style="width:${(frac * 100).toFixed(1)}%"></div></div>` +
        `<span>phase at crossover: ${gauge.requiredDeg.toFixed(2)} deg of ` +
        `${gauge.availableDeg.toFixed(2)} deg achievable</span>`
    } else {
      gaugeEl.textContent = ''
    }
    const deltas = response.delta_at_notches
      .map((d) => `delta_s(${d.omega_n} rad/s) = ${d.delta_s_pct.toFixed(1)}%`)
      .join('; ')
    this.el('notch-deltas').textContent = deltas
  }

  private badge(id: string, pass: boolean, text: string): void {
    const node = this.el(id)
    node.textContent = text
    node.className = pass ? 'badge pass' : 'badge fail'
  }

  showInfeasibleBanner(maxFeasibleDeg: number, message: string): void {
    const banner = this.el('banner')
    banner.style.display = 'block'
    banner.textContent =
      `infeasible: the gain filter demands more phase than the reset lead can give; ` +
      `maximum achievable is ${maxFeasibleDeg.toFixed(2)} deg (${message})`
  }

  clearBanner(): void {
    const banner = this.el('banner')
    banner.style.display = 'none'
    banner.textContent = ''
  }

  showFieldError(field: string, message: string): void {
    const slot = this.root.getElementById(`error-${field}`) ?? this.el('error-request')
    slot.textContent = message
  }

  clearFieldErrors(): void {
    for (const node of Array.from(this.root.querySelectorAll('.field-error'))) {
      node.textContent = ''
    }
  }

  setPending(pending: boolean): void {
    this.el('pending').style.visibility = pending ? 'visible' : 'hidden'
  }

  renderCompare(entries: CompareEntry[]): void {
    this.el('chart-compare').innerHTML = renderChart(
      entries.map((e) => ({ x: e.omega, y: e.deltaS, label: e.label })),
      { title: 'improvement indicator overlay', xLabel: 'omega (rad/s)', yLabel: '%' },
    )
    const rows = entries
      .map((e) => `<tr><td>${e.label}</td><td>${e.verdict}</td>` +
        `<td>${e.msDb.toFixed(2)}</td><td>${e.mrDb.toFixed(2)}</td>` +
        `<td>${e.deltas.map((d) => `${d.delta_s_pct.toFixed(1)}%`).join(', ')}</td></tr>`)
      .join('')
    this.el('compare-table').innerHTML =
      `<table><tr><th>design</th><th>verdict</th><th>Ms (dB)</th><th>Mr (dB)</th>` +
      `<th>reduction</th></tr>${rows}</table>`
  }

  renderComparePlaceholder(): void {
    this.el('chart-compare').innerHTML = ''
    this.el('compare-table').innerHTML = '<p class="placeholder">store designs to compare them</p>'
  }
}
