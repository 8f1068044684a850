import { MetricsTable, metricColumn } from "./csv"

/** Mean line plus min-max band of one metric over an agent's seed runs. */
export interface AgentSeries {
  label: string
  slots: number[]
  mean: number[]
  min: number[]
  max: number[]
  nSeeds: number
}

export function buildSeries(label: string, tables: MetricsTable[], metric: string): AgentSeries {
  if (tables.length === 0) throw new Error(`agent "${label}" has no input CSVs`)
  const slots = tables[0].slots
  for (const t of tables) {
    if (t.slots.length !== slots.length) {
      throw new Error(
        `CSVs for "${label}" disagree on the slot axis: ` +
          `${t.path} has ${t.slots.length} rows, expected ${slots.length}`,
      )
    }
  }
  const runs = tables.map((t) => metricColumn(t, metric))
  const n = slots.length
  const mean = new Array<number>(n)
  const min = new Array<number>(n)
  const max = new Array<number>(n)
  for (let i = 0; i < n; i++) {
    let lo = Infinity
    let hi = -Infinity
    let sum = 0
    for (const run of runs) {
      const v = run[i]
      sum += v
      if (v < lo) lo = v
      if (v > hi) hi = v
    }
    mean[i] = sum / runs.length
    min[i] = lo
    max[i] = hi
  }
  return { label, slots, mean, min, max, nSeeds: runs.length }
}
