import * as echarts from "echarts"
import { AgentSeries } from "./series"

const PALETTE = ["#c23531", "#2f4554", "#61a0a8", "#d48265", "#749f83", "#ca8622"]

export interface PlotSpec {
  metric: string
  series: AgentSeries[]
  width?: number
  height?: number
  title?: string
}

const METRIC_LABELS: Record<string, string> = {
  cum_reward: "cumulative reward",
  cum_abnormality: "cumulative abnormality",
  cum_sinr: "cumulative SINR",
}

/** Render the comparison figure as an SVG string (server-side, no DOM). */
export function renderSvg(spec: PlotSpec): string {
  const width = spec.width ?? 900
  const height = spec.height ?? 560
  const chart = echarts.init(null as unknown as HTMLElement, undefined, {
    renderer: "svg",
    ssr: true,
    width,
    height,
  })

  const series: echarts.SeriesOption[] = []
  spec.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length]
    if (s.nSeeds > 1) {
      // min-max band: lower bound line, then the gap up to the max, stacked
      series.push({
        name: `${s.label}-band-lo`,
        type: "line",
        data: s.slots.map((t, k) => [t, s.min[k]]),
        lineStyle: { opacity: 0 },
        stack: `band-${s.label}`,
        symbol: "none",
        silent: true,
        tooltip: { show: false },
      })
      series.push({
        name: `${s.label}-band`,
        type: "line",
        data: s.slots.map((t, k) => [t, s.max[k] - s.min[k]]),
        lineStyle: { opacity: 0 },
        areaStyle: { color, opacity: 0.18 },
        stack: `band-${s.label}`,
        symbol: "none",
        silent: true,
        tooltip: { show: false },
      })
    }
    series.push({
      name: s.label,
      type: "line",
      data: s.slots.map((t, k) => [t, s.mean[k]]),
      showSymbol: false,
      lineStyle: { width: 2, color },
      itemStyle: { color },
    })
  })

  chart.setOption({
    animation: false,
    title: {
      text: spec.title ?? (METRIC_LABELS[spec.metric] ?? spec.metric),
      left: "center",
    },
    legend: {
      bottom: 0,
      data: spec.series.map((s) => s.label),
    },
    grid: { left: 70, right: 30, top: 50, bottom: 60 },
    xAxis: { type: "value", name: "time slot", nameLocation: "middle", nameGap: 28 },
    yAxis: {
      type: "value",
      name: METRIC_LABELS[spec.metric] ?? spec.metric,
      nameLocation: "middle",
      nameGap: 52,
    },
    series,
  })
  const svg = chart.renderToSVGString()
  chart.dispose()
  return canonicalizeClassNames(svg)
}

/**
 * zrender numbers its CSS classes and clip-path ids with process-global
 * counters, so repeated renders in one process drift (zr0-cls-0 vs zr1-cls-4,
 * zr2-c0 vs zr3-c0). Renumber both token families by order of first
 * appearance to make the output a pure function of the spec.
 */
export function canonicalizeClassNames(svg: string): string {
  const renumber = (text: string, pattern: RegExp, prefix: string): string => {
    const mapping = new Map<string, string>()
    return text.replace(pattern, (token) => {
      let canon = mapping.get(token)
      if (canon === undefined) {
        canon = `${prefix}${mapping.size}`
        mapping.set(token, canon)
      }
      return canon
    })
  }
  let out = renumber(svg, /zr\d+-cls-\d+/g, "zr-cls-")
  out = renumber(out, /zr\d+-c\d+/g, "zr-clip-")
  return out
}
