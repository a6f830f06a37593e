// Every visual encoding lives here so the contract tests have a single map
// to check against. Nothing elsewhere hard-codes a colour or a pixel ramp.

export const theme = {
  colors: {
    positive: "#1a7f37", // attribution pushes the value up
    negative: "#b42318", // attribution pushes the value down
    neutral: "#9aa0a6",
    subjectOutline: "#1f2328",
    teamMember: "#2463eb", // team members tinted blue
    nodeFill: "#e7eaee",
    relevantFill: "#cfe8d5",
  },
  forcePlot: {
    width: 640,
    barHeight: 28,
    minSegmentPx: 2,
  },
  network: {
    minRadius: 6,
    maxRadius: 26,
    minEdgeOpacity: 0.15,
    maxEdgeOpacity: 1.0,
    baseEdgeOpacity: 0.25, // edges without an attribution
  },
};

export function signColor(phi: number): string {
  if (phi > 0) return theme.colors.positive;
  if (phi < 0) return theme.colors.negative;
  return theme.colors.neutral;
}

/** Node radius, strictly decreasing in rank: rank 1 gets maxRadius, rank n
 * gets minRadius. */
export function radiusForRank(rank: number, n: number): number {
  const { minRadius, maxRadius } = theme.network;
  if (n <= 1) return maxRadius;
  const t = (rank - 1) / (n - 1);
  return maxRadius - t * (maxRadius - minRadius);
}

/** Edge opacity, non-decreasing in |phi| relative to the largest magnitude
 * in the explanation; zero-phi edges stay at the floor. */
export function opacityForPhi(phi: number, maxAbs: number): number {
  const { minEdgeOpacity, maxEdgeOpacity } = theme.network;
  if (maxAbs <= 0) return minEdgeOpacity;
  const t = Math.min(Math.abs(phi) / maxAbs, 1);
  return minEdgeOpacity + t * (maxEdgeOpacity - minEdgeOpacity);
}
