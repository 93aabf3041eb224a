import { describe, expect, it } from "vitest";

import { SvgChart, linearScale, logScale, niceTicks } from "../src/svg";

describe("scales", () => {
    it("linearScale maps domain endpoints onto range endpoints", () => {
        const s = linearScale(0, 10, 100, 500);
        expect(s(0)).toBe(100);
        expect(s(10)).toBe(500);
        expect(s(5)).toBe(300);
    });

    it("linearScale supports inverted ranges (screen y grows downward)", () => {
        const s = linearScale(0, 1, 500, 100);
        expect(s(0)).toBe(500);
        expect(s(1)).toBe(100);
        expect(s(0.25)).toBe(400);
    });

    it("logScale spaces decades evenly", () => {
        const s = logScale(1, 100, 0, 200);
        expect(s(1)).toBeCloseTo(0);
        expect(s(10)).toBeCloseTo(100);
        expect(s(100)).toBeCloseTo(200);
    });

    it("niceTicks stays inside the interval with round, even steps", () => {
        const ticks = niceTicks(0, 0.37);
        expect(ticks.length).toBeGreaterThanOrEqual(3);
        expect(ticks[0]).toBeGreaterThanOrEqual(0);
        expect(ticks[ticks.length - 1]).toBeLessThanOrEqual(0.37);
        const steps = ticks.slice(1).map((t, i) => t - ticks[i]);
        for (const step of steps) {
            expect(step).toBeCloseTo(steps[0]);
        }
    });
});

describe("SvgChart", () => {
    it("embeds seed and schema in metadata and the visible caption", () => {
        const chart = new SvgChart(200, 100);
        const svg = chart.render({ masterSeed: 42, schema: "mergesim.metrics.v1" });
        expect(svg).toContain('<metadata>{"masterSeed":42,"schema":"mergesim.metrics.v1"}</metadata>');
        expect(svg).toContain("seed 42 | mergesim.metrics.v1");
    });

    it("names series groups so figures can be inspected", () => {
        const chart = new SvgChart(200, 100);
        chart.series("lvt", [{ x: 0, y: 0 }, { x: 10, y: 10 }], "#123456", { dash: "5,3" });
        const svg = chart.render({ masterSeed: 0, schema: "s" });
        expect(svg).toContain('<g id="series-lvt">');
        expect(svg).toContain('stroke-dasharray="5,3"');
    });

    it("escapes markup-significant characters in text", () => {
        const chart = new SvgChart(200, 100);
        chart.text(5, 5, "a<b>&c");
        const svg = chart.render({ masterSeed: 0, schema: "s" });
        expect(svg).toContain("a&lt;b&gt;&amp;c");
    });
});
