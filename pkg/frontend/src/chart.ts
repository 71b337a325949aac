// Small SVG line charts: logarithmic frequency axis, dB or linear y.
// Matches the plotting idiom of the backend's emitted figures.

export interface ChartSeries {
  x: number[]
  y: (number | null)[]
  label: string
  color?: string
  dashed?: boolean
}

export interface ChartOptions {
  title: string
  xLabel: string
  yLabel: string
  width?: number
  height?: number
  yDb?: boolean
}

const PALETTE = ['#1f6fb2', '#d1495b', '#3c8d53', '#8d6b94', '#c97b2d', '#444444']
const M = { l: 64, r: 16, t: 34, b: 44 }

export function renderChart(series: ChartSeries[], opts: ChartOptions): string {
  const width = opts.width ?? 640
  const height = opts.height ?? 360
  const toY = (v: number) => (opts.yDb ? 20 * Math.log10(Math.max(Math.abs(v), 1e-300)) : v)

  const xs: number[] = []
  const ys: number[] = []
  for (const s of series) {
    for (let i = 0; i < s.x.length; i++) {
      const yv = s.y[i]
      if (yv === null || !isFinite(yv) || s.x[i] <= 0) continue
      xs.push(Math.log10(s.x[i]))
      ys.push(toY(yv))
    }
  }
  if (xs.length === 0) {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}"><text x="20" y="30">no data</text></svg>`
  }
  const x0 = Math.min(...xs)
  const x1 = Math.max(...xs)
  let y0 = Math.min(...ys)
  let y1 = Math.max(...ys)
  if (y1 - y0 < 1e-12) {
    y0 -= 0.5
    y1 += 0.5
  }
  const pad = 0.05 * (y1 - y0)
  y0 -= pad
  y1 += pad

  const px = (lx: number) => M.l + ((lx - x0) / (x1 - x0)) * (width - M.l - M.r)
  const py = (yv: number) => height - M.b - ((yv - y0) / (y1 - y0)) * (height - M.t - M.b)

  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    `<text x="${width / 2}" y="18" text-anchor="middle" font-size="13" font-family="sans-serif">${esc(opts.title)}</text>`,
    `<rect x="${M.l}" y="${M.t}" width="${width - M.l - M.r}" height="${height - M.t - M.b}" fill="none" stroke="#999"/>`,
  ]
  for (let d = Math.ceil(x0); d <= Math.floor(x1); d++) {
    const gx = px(d)
    parts.push(`<line x1="${gx}" y1="${M.t}" x2="${gx}" y2="${height - M.b}" stroke="#eee"/>`)
    parts.push(`<text x="${gx}" y="${height - M.b + 14}" text-anchor="middle" font-size="10" font-family="sans-serif">1e${d}</text>`)
  }
  const ticks = 5
  for (let i = 0; i <= ticks; i++) {
    const yv = y0 + ((y1 - y0) * i) / ticks
    const gy = py(yv)
    parts.push(`<line x1="${M.l}" y1="${gy}" x2="${width - M.r}" y2="${gy}" stroke="#eee"/>`)
    parts.push(`<text x="${M.l - 5}" y="${gy + 3}" text-anchor="end" font-size="10" font-family="sans-serif">${yv.toFixed(1)}</text>`)
  }
  series.forEach((s, i) => {
    const color = s.color ?? PALETTE[i % PALETTE.length]
    const pts: string[] = []
    for (let k = 0; k < s.x.length; k++) {
      const yv = s.y[k]
      if (yv === null || !isFinite(yv) || s.x[k] <= 0) continue
      pts.push(`${px(Math.log10(s.x[k])).toFixed(1)},${py(toY(yv)).toFixed(1)}`)
    }
    const dash = s.dashed ? ' stroke-dasharray="6 4"' : ''
    parts.push(`<polyline points="${pts.join(' ')}" fill="none" stroke="${color}" stroke-width="1.5"${dash}/>`)
    const ly = M.t + 14 + 14 * i
    parts.push(`<line x1="${width - 150}" y1="${ly - 3}" x2="${width - 124}" y2="${ly - 3}" stroke="${color}" stroke-width="2"${dash}/>`)
    parts.push(`<text x="${width - 118}" y="${ly}" font-size="10" font-family="sans-serif">${esc(s.label)}</text>`)
  })
  parts.push(`<text x="${width / 2}" y="${height - 8}" text-anchor="middle" font-size="11" font-family="sans-serif">${esc(opts.xLabel)}</text>`)
  parts.push(`<text x="14" y="${height / 2}" text-anchor="middle" font-size="11" font-family="sans-serif" transform="rotate(-90 14 ${height / 2})">${esc(opts.yLabel)}</text>`)
  parts.push('</svg>')
  return parts.join('\n')
}

function esc(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;')
}
