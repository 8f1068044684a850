import { readFileSync } from "fs"
import Papa from "papaparse"

/** One parsed metrics CSV: slot axis plus named numeric columns. */
export interface MetricsTable {
  path: string
  slots: number[]
  columns: Record<string, number[]>
}

export class MissingColumnError extends Error {
  constructor(column: string, path: string) {
    super(`column "${column}" not found in ${path}`)
    this.name = "MissingColumnError"
  }
}

const SLOT_COLUMN = "t"

/** Parse a harness metrics CSV; every column except `hypothesis` is numeric. */
export function readMetricsCsv(path: string): MetricsTable {
  const text = readFileSync(path, "utf8")
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  })
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0]
    throw new Error(`failed to parse ${path}: ${e.message} (row ${e.row})`)
  }
  const rows = parsed.data
  if (rows.length === 0) throw new Error(`${path} has no data rows`)
  const header = parsed.meta.fields ?? []
  if (!header.includes(SLOT_COLUMN)) throw new MissingColumnError(SLOT_COLUMN, path)

  const columns: Record<string, number[]> = {}
  for (const name of header) {
    if (name === "hypothesis") continue
    columns[name] = rows.map((r) => Number(r[name]))
  }
  return { path, slots: columns[SLOT_COLUMN], columns }
}

/** Extract one metric column, failing loudly when it is absent. */
export function metricColumn(table: MetricsTable, metric: string): number[] {
  const col = table.columns[metric]
  if (col === undefined) throw new MissingColumnError(metric, table.path)
  return col
}
