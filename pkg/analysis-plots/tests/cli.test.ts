/**
 * End-to-end checks against real run directories produced by the
 * simulator's experiment scripts (the case studies, the cached
 * evaluation grid, and the threshold sweep).
 */

import * as fs from "fs";
import * as path from "path";
import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { main } from "../src/cli";
import { tmpDir } from "./fixtures";

const RESULTS = path.resolve(__dirname, "..", "..", "results");
const AGENTS = ["lvt", "omniscient", "mcts-prior", "mcts-normal", "qmdp", "rule-based"];

beforeEach(() => {
    vi.spyOn(console, "log").mockImplementation(() => {});
    vi.spyOn(console, "error").mockImplementation(() => {});
});
afterEach(() => {
    vi.restoreAllMocks();
});

describe("plots sweep", () => {
    it("writes all three metric figures with every agent series", () => {
        const out = tmpDir();
        const code = main(["sweep", "--run", path.join(RESULTS, "evaluation"), "--out", out]);
        expect(code).toBe(0);
        for (const name of ["sweep-safety.svg", "sweep-reward.svg", "sweep-merge-time.svg"]) {
            const svg = fs.readFileSync(path.join(out, name), "utf8");
            for (const agent of AGENTS) {
                expect(svg, `${name} missing ${agent}`).toContain(`<g id="series-${agent}">`);
            }
        }
    });

    it("is idempotent across reruns", () => {
        const a = tmpDir();
        const b = tmpDir();
        const run = path.join(RESULTS, "evaluation");
        expect(main(["sweep", "--run", run, "--out", a])).toBe(0);
        expect(main(["sweep", "--run", run, "--out", b])).toBe(0);
        expect(main(["sweep", "--run", run, "--out", b])).toBe(0); // overwrite in place
        for (const name of fs.readdirSync(a)) {
            expect(fs.readFileSync(path.join(a, name), "utf8")).toBe(
                fs.readFileSync(path.join(b, name), "utf8"),
            );
        }
    });

    it("fails loudly on a drifted schema tag", () => {
        const run = tmpDir();
        const data = JSON.parse(
            fs.readFileSync(path.join(RESULTS, "evaluation", "metrics.json"), "utf8"),
        );
        data.format = "mergesim.metrics.v999";
        fs.writeFileSync(path.join(run, "metrics.json"), JSON.stringify(data));
        const out = tmpDir();
        expect(main(["sweep", "--run", run, "--out", out])).toBe(1);
        expect(fs.readdirSync(out)).toHaveLength(0);
        expect(vi.mocked(console.error).mock.calls.join(" ")).toContain("mergesim.metrics.v999");
    });
});

describe("plots case", () => {
    it("renders one figure per case directory", () => {
        const out = tmpDir();
        const code = main(["case", "--run", path.join(RESULTS, "case_studies"), "--out", out]);
        expect(code).toBe(0);
        expect(fs.readdirSync(out).sort()).toEqual(["case1.svg", "case2.svg", "case3.svg"]);
        const svg = fs.readFileSync(path.join(out, "case3.svg"), "utf8");
        expect(svg).toContain('<g id="series-ego-position">');
        expect(svg).toContain("GIVE_WAY");
    });

    it("accepts a single case directory too", () => {
        const out = tmpDir();
        const code = main([
            "case", "--run", path.join(RESULTS, "case_studies", "case1"), "--out", out,
        ]);
        expect(code).toBe(0);
        expect(fs.readdirSync(out)).toEqual(["case1.svg"]);
    });
});

describe("plots belief", () => {
    it("renders the tracked posterior for the scripted rear driver", () => {
        const out = tmpDir();
        const code = main([
            "belief", "--run", path.join(RESULTS, "case_studies", "case3"),
            "--out", out, "--vehicle", "2",
        ]);
        expect(code).toBe(0);
        const svg = fs.readFileSync(path.join(out, "case3-belief-v2.svg"), "utf8");
        expect(svg).toContain('<g id="heatmap">');
        expect(svg).toContain('<g id="series-true-psi">');
    });
});

describe("plots thresholds", () => {
    it("renders the calibration sweep bars", () => {
        const out = tmpDir();
        const code = main([
            "thresholds", "--run", path.join(RESULTS, "threshold_sweep.json"), "--out", out,
        ]);
        expect(code).toBe(0);
        const svg = fs.readFileSync(path.join(out, "threshold-sweep.svg"), "utf8");
        expect(svg).toContain('<g id="bars">');
        expect(svg).toContain("seed 0 | mergesim.threshold-sweep.v1");
    });
});

describe("argument handling", () => {
    it("rejects unknown commands and missing --run", () => {
        expect(main(["scatter", "--run", "x"])).toBe(2);
        expect(main(["sweep"])).toBe(2);
        expect(main(["sweep", "--run", "x", "--bogus"])).toBe(2);
    });
});
