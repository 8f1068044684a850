import { writeFileSync } from "fs"
import { readMetricsCsv } from "./csv"
import { renderSvg } from "./render"
import { AgentSeries, buildSeries } from "./series"

const METRICS = ["cum_reward", "cum_abnormality", "cum_sinr"] as const

export interface PlotArgs {
  metric: string
  inputs: { label: string; paths: string[] }[]
  out: string
  title?: string
}

export function parsePlotArgs(argv: readonly string[]): PlotArgs {
  let metric: string | null = null
  let out: string | null = null
  let title: string | undefined
  const inputs: { label: string; paths: string[] }[] = []
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i]
    const next = () => {
      if (i + 1 >= argv.length) throw new Error(`${a} expects a value`)
      return argv[++i]
    }
    if (a === "--metric") metric = next()
    else if (a === "--out") out = next()
    else if (a === "--title") title = next()
    else if (a === "--inputs") {
      const spec = next()
      const eq = spec.indexOf("=")
      if (eq <= 0) throw new Error(`--inputs expects label=csv[,csv...], got "${spec}"`)
      inputs.push({ label: spec.slice(0, eq), paths: spec.slice(eq + 1).split(",") })
    } else throw new Error(`unknown argument "${a}"`)
  }
  if (!metric) throw new Error("--metric is required")
  if (!(METRICS as readonly string[]).includes(metric)) {
    throw new Error(`--metric must be one of ${METRICS.join(", ")}`)
  }
  if (!out) throw new Error("--out is required")
  if (inputs.length === 0) throw new Error("at least one --inputs label=csv is required")
  return { metric, inputs, out, title }
}

export function runPlot(args: PlotArgs): void {
  const series: AgentSeries[] = args.inputs.map(({ label, paths }) =>
    buildSeries(label, paths.map(readMetricsCsv), args.metric),
  )
  const svg = renderSvg({ metric: args.metric, series, title: args.title })
  writeFileSync(args.out, svg)
}

export function main(argv: readonly string[]): number {
  const [command, ...rest] = argv
  try {
    if (command !== "plot") {
      throw new Error(`usage: cli.js plot --metric <m> --inputs label=csv[,csv...] --out fig.svg`)
    }
    const args = parsePlotArgs(rest)
    runPlot(args)
    console.log(`wrote ${args.out}`)
    return 0
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`)
    return 2
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)))
}
