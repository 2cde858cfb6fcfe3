/**
 * Loader for the simulator's ensemble CSV files.
 *
 * The schema is validated verbatim against the emitting side's header; any
 * drift fails loudly with the offending column named.  A header-only file
 * parses to an empty bundle.
 */

import { readFileSync } from "node:fs";

export const EXPECTED_HEADER = [
  "tau",
  "mean_purity",
  "std_purity",
  "mean_r2sq",
  "std_r2sq",
  "mean_rzz",
  "mean_enc1_purity",
  "mean_enc2_purity",
  "mean_concurrence",
  "mean_bell_fidelity",
  "n",
] as const;

export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

/** Mean curves plus standard errors for one ensemble. */
export interface CurveBundle {
  label: string;
  tau: number[];
  mean: {
    purity: number[];
    r2sq: number[];
    rzz: number[];
    enc1Purity: number[];
    enc2Purity: number[];
    concurrence: number[];
    bellFidelity: number[];
  };
  stderr: {
    purity: number[];
    r2sq: number[];
  };
  count: number;
}

function emptyBundle(label: string): CurveBundle {
  return {
    label,
    tau: [],
    mean: {
      purity: [],
      r2sq: [],
      rzz: [],
      enc1Purity: [],
      enc2Purity: [],
      concurrence: [],
      bellFidelity: [],
    },
    stderr: { purity: [], r2sq: [] },
    count: 0,
  };
}

function validateHeader(line: string): void {
  const got = line.split(",");
  const expected = [...EXPECTED_HEADER];
  const missing = expected.filter((c) => !got.includes(c));
  const extra = got.filter((c) => !expected.includes(c as (typeof EXPECTED_HEADER)[number]));
  if (missing.length > 0 || extra.length > 0) {
    const parts = [];
    if (missing.length > 0) parts.push(`missing column(s): ${missing.join(", ")}`);
    if (extra.length > 0) parts.push(`unexpected column(s): ${extra.join(", ")}`);
    throw new SchemaError(`CSV schema drift; ${parts.join("; ")}`);
  }
  if (got.join(",") !== expected.join(",")) {
    throw new SchemaError(`CSV schema drift; column order must be ${expected.join(",")}`);
  }
}

export function parseCsv(text: string, label: string): CurveBundle {
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty file: no header line");
  }
  validateHeader(lines[0]);
  const bundle = emptyBundle(label);
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== EXPECTED_HEADER.length) {
      throw new SchemaError(`row ${i + 1}: expected ${EXPECTED_HEADER.length} fields, got ${cells.length}`);
    }
    const nums = cells.map(Number);
    if (nums.some((v) => !Number.isFinite(v))) {
      throw new SchemaError(`row ${i + 1}: non-numeric field`);
    }
    const [tau, mPurity, sPurity, mR2, sR2, mRzz, mEnc1, mEnc2, mConc, mBell, n] = nums;
    if (bundle.tau.length > 0 && tau <= bundle.tau[bundle.tau.length - 1]) {
      throw new SchemaError(`row ${i + 1}: tau must be strictly increasing`);
    }
    if (bundle.count === 0) {
      bundle.count = n;
    } else if (n !== bundle.count) {
      throw new SchemaError(`row ${i + 1}: trajectory count changed from ${bundle.count} to ${n}`);
    }
    const root = Math.sqrt(n);
    bundle.tau.push(tau);
    bundle.mean.purity.push(mPurity);
    bundle.mean.r2sq.push(mR2);
    bundle.mean.rzz.push(mRzz);
    bundle.mean.enc1Purity.push(mEnc1);
    bundle.mean.enc2Purity.push(mEnc2);
    bundle.mean.concurrence.push(mConc);
    bundle.mean.bellFidelity.push(mBell);
    bundle.stderr.purity.push(sPurity / root);
    bundle.stderr.r2sq.push(sR2 / root);
  }
  return bundle;
}

export function loadCsv(path: string, label: string): CurveBundle {
  return parseCsv(readFileSync(path, "utf8"), label);
}
