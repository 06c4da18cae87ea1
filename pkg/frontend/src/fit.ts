/** Least-squares log-log slope, the same estimator the physics suite records:
 *    slope = sum((lx - <lx>)(ly - <ly>)) / sum((lx - <lx>)^2),
 *  with natural logs of the data.  Keeping the definition identical is what
 *  lets annotated figures be cross-checked against report.json to 1e-9. */

export interface Fit {
  slope: number;
  intercept: number;
}

export function loglogFit(x: number[], y: number[]): Fit {
  if (x.length !== y.length || x.length < 2) {
    throw new Error("need at least two (x, y) samples");
  }
  const lx = x.map(Math.log);
  const ly = y.map(Math.log);
  const mx = mean(lx);
  const my = mean(ly);
  let num = 0;
  let den = 0;
  for (let i = 0; i < lx.length; i++) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  const slope = num / den;
  return { slope, intercept: my - slope * mx };
}

function mean(v: number[]): number {
  return v.reduce((a, b) => a + b, 0) / v.length;
}
