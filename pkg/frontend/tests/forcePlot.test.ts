import { describe, expect, it } from "vitest";

import { buildForcePlot, renderForcePlotSvg } from "../src/forcePlot";
import { theme } from "../src/theme";
import { FactualResponse } from "../src/types";
import { fixture } from "./helpers";

const skillsExpl = fixture<FactualResponse>("factual_skills_p1.json");
const queryExpl = fixture<FactualResponse>("factual_query_p4.json");

describe("force plot", () => {
  it("renders the dominant attribution green and longest", () => {
    const scene = buildForcePlot(skillsExpl);
    expect(scene.flat).toBe(false);
    const longest = scene.segments.reduce((a, b) => (b.length > a.length ? b : a));
    expect(longest.label).toBe("ml @ node 0");
    expect(longest.color).toBe(theme.colors.positive);
  });

  it("segment lengths are proportional to |phi|", () => {
    const expl: FactualResponse = {
      ...skillsExpl,
      attributions: [
        { kind: "node_skill", node: 0, skill: "a", phi: 0.4 },
        { kind: "node_skill", node: 0, skill: "b", phi: -0.2 },
      ],
    };
    const scene = buildForcePlot(expl);
    expect(scene.segments[0].length / scene.segments[1].length).toBeCloseTo(2, 6);
    expect(scene.segments[1].color).toBe(theme.colors.negative);
  });

  it("zero attributions collapse to a flat bar with a notice", () => {
    expect(queryExpl.attributions.every((a) => a.phi === 0)).toBe(true);
    const scene = buildForcePlot(queryExpl);
    expect(scene.flat).toBe(true);
    expect(scene.segments).toHaveLength(0);
    expect(renderForcePlotSvg(scene)).toContain(scene.notice);
  });

  it("a single feature spans value_full - value_empty", () => {
    const expl: FactualResponse = {
      subject: 0,
      mode: "search",
      value_full: 1,
      value_empty: 0,
      exact: true,
      attributions: [{ kind: "query_keyword", skill: "ml", phi: 1.0 }],
    };
    const scene = buildForcePlot(expl);
    expect(scene.segments).toHaveLength(1);
    expect(scene.segments[0].length).toBe(theme.forcePlot.width);
    expect(scene.segments[0].phi).toBe(expl.value_full - expl.value_empty);
  });

  it("base value and output value are annotated", () => {
    const svg = renderForcePlotSvg(buildForcePlot(skillsExpl));
    expect(svg).toContain("base 0");
    expect(svg).toContain("f(x) 1");
  });

  it("is deterministic for a fixed input", () => {
    expect(buildForcePlot(skillsExpl)).toEqual(buildForcePlot(skillsExpl));
    expect(renderForcePlotSvg(buildForcePlot(skillsExpl))).toBe(
      renderForcePlotSvg(buildForcePlot(skillsExpl))
    );
  });
});
