// Read-only rendering model for harness sweep reports: parse the CSV the
// harness emits (or take the structured report from run_sweep) and pick
// out plottable series. No statistics are recomputed here.

export interface ParsedReport {
  columns: string[];
  rows: (string | number | boolean)[][];
}

export interface ChartSeries {
  label: string;
  x: number[];
  y: number[];
}

export function parseReportCsv(text: string): ParsedReport {
  const lines = text
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
  if (lines.length < 1) throw new Error("empty report");
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((line) => {
    const fields = line.split(",");
    if (fields.length !== columns.length) {
      throw new Error(`row has ${fields.length} fields, header has ${columns.length}`);
    }
    return fields.map((field) => {
      if (field === "true") return true;
      if (field === "false") return false;
      const value = Number(field);
      return Number.isNaN(value) && field !== "nan" ? field : value;
    });
  });
  return { columns, rows };
}

function numericColumn(report: ParsedReport, name: string): number[] {
  const index = report.columns.indexOf(name);
  if (index < 0) throw new Error(`no column ${name}`);
  return report.rows.map((row) => Number(row[index]));
}

/**
 * Series selection by experiment kind:
 * - direction-style sweeps: median (and p90) versus the cell value;
 * - resolution sweeps: empirical and theoretical separation versus range,
 *   so the chart shows the measured curve on top of the theoretical one.
 * - registration sweeps: mean error versus angle difference.
 */
export function chartSeries(report: ParsedReport): ChartSeries[] {
  if (report.columns.includes("median_deg")) {
    const x = numericColumn(report, "cell");
    return [
      { label: "median error (deg)", x, y: numericColumn(report, "median_deg") },
      { label: "90th percentile (deg)", x, y: numericColumn(report, "p90_deg") },
    ];
  }
  if (report.columns.includes("empirical_m")) {
    const x = numericColumn(report, "cell");
    return [
      { label: "empirical resolution (m)", x, y: numericColumn(report, "empirical_m") },
      { label: "theoretical d*tan(eps) (m)", x, y: numericColumn(report, "theoretical_m") },
    ];
  }
  if (report.columns.includes("mean_error_m")) {
    const x = numericColumn(report, "cell");
    return [{ label: "mean error (m)", x, y: numericColumn(report, "mean_error_m") }];
  }
  throw new Error("unrecognized report columns");
}
