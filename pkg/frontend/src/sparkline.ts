// Dataset-quality trajectory sparkline helpers (pure functions).

export function trajectoryValues(
  trajectory: Record<string, number | null>[],
): number[] {
  return trajectory.map((entry) => {
    const defined = Object.values(entry).filter((v): v is number => v !== null);
    if (!defined.length) return 0;
    return defined.reduce((a, b) => a + b, 0) / defined.length;
  });
}

export function makeSparklinePoints(
  values: number[],
  width: number,
  height: number,
): string {
  if (!values.length) return "";
  if (values.length === 1) {
    return `0,${(height / 2).toFixed(1)} ${width},${(height / 2).toFixed(1)}`;
  }
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo || 1;
  const step = width / (values.length - 1);
  return values
    .map((v, i) => {
      const x = i * step;
      const y = height - ((v - lo) / span) * (height - 2) - 1;
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
}
