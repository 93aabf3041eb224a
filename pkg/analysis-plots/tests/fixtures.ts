/** Minimal artifacts matching the simulator's on-disk schemas. */

import * as fs from "fs";
import * as os from "os";
import * as path from "path";

export function tmpDir(): string {
    return fs.mkdtempSync(path.join(os.tmpdir(), "plots-test-"));
}

export function metricsCell(agent: string, iterations: number | null, over: Partial<Record<string, unknown>> = {}) {
    return {
        agent,
        iterations,
        episodes: 4,
        safety_violation_rate: 0.0,
        mean_reward: -2.0,
        se_reward: 0.4,
        mean_merge_time: 9.5,
        se_merge_time: 0.3,
        hard_brake_rate: 0.25,
        give_way_rate: 0.5,
        merged_rate: 1.0,
        ...over,
    };
}

export function metricsFixture() {
    return {
        format: "mergesim.metrics.v1",
        master_seed: 7,
        episodes: 4,
        sweep: [1, 16],
        results: [
            metricsCell("lvt", 1, { mean_reward: -4.0 }),
            metricsCell("lvt", 16, { mean_reward: -1.0 }),
            metricsCell("omniscient", 1, { mean_reward: -3.0 }),
            metricsCell("omniscient", 16, { mean_reward: -0.5 }),
            metricsCell("rule-based", null, { mean_reward: -6.0 }),
        ],
    };
}

const TRACE_TAG = "mergesim.trace.v1";

function traceRow(t: number, policy: string, egoX: number, vX: number[], terminal = false) {
    const cells = [
        TRACE_TAG,
        t.toFixed(1),
        policy,
        egoX.toFixed(3),
        terminal ? "" : "0.000",
        terminal ? "" : "14.000",
        terminal ? "" : "0.500",
        terminal ? "" : "0.000",
        terminal ? "" : "0",
        terminal ? "" : "0",
        terminal ? "" : "0",
    ];
    for (const x of vX) {
        cells.push(x.toFixed(3), "3.700", "16.000", terminal ? "" : "0.100");
    }
    return cells.join(",");
}

/** Two-vehicle trace: header, two action rows, one terminal row. */
export function traceFixture(opts: { truncated?: boolean } = {}): string {
    const header = [
        "schema", "t", "policy", "ego_x", "ego_y", "ego_vx", "ego_ax", "ego_vy",
        "merged", "hard_brake", "unsafe",
        "v0_x", "v0_y", "v0_vx", "v0_ax",
        "v1_x", "v1_y", "v1_vx", "v1_ax",
    ].join(",");
    const rows = [
        header,
        traceRow(0.0, "TRACK_SPEED", 60.0, [120.0, -40.0]),
        traceRow(0.1, "MERGE_IN", 61.4, [121.6, -38.5]),
    ];
    if (!opts.truncated) {
        rows.push(traceRow(0.2, "", 62.8, [123.2, -37.0], true));
    }
    return rows.join("\n") + "\n";
}

export function beliefSnapshot(peak: number) {
    const levels = 6;
    const marg = Array.from({ length: levels }, (_, i) =>
        i === peak ? 0.6 : 0.4 / (levels - 1));
    return { aggressiveness: marg, attentive: 0.9 };
}

export function episodeFixture(opts: { beliefs?: boolean } = {}) {
    const withBeliefs = opts.beliefs ?? true;
    const snap = () => (withBeliefs ? [beliefSnapshot(2), beliefSnapshot(4)] : null);
    return {
        format: "mergesim.episode.v1",
        agent: withBeliefs ? "lvt" : "omniscient",
        master_seed: 7,
        scenario: "tiny",
        outcome: "merged",
        merge_time: 0.2,
        final_time: 0.2,
        total_reward: -1.0,
        decisions: [
            { t: 0.0, policy: "TRACK_SPEED", arms: null, belief: snap() },
            { t: 0.1, policy: "MERGE_IN", arms: null, belief: snap() },
        ],
    };
}

export function scenarioFixture() {
    return {
        format: "mergesim.scenario.v1",
        name: "tiny",
        ego_x: 60.0,
        ego_vx: 14.0,
        vehicles: [
            { x: 120.0, y: 3.7, vx: 16.0, psi: 0.4 },
            { x: -40.0, y: 3.7, vx: 15.0, psi: 0.6 },
        ],
        overrides: { "0.1": { "1": 0.9 } },
        time_limit: 12.0,
    };
}

export function sweepFixture() {
    return {
        format: "mergesim.threshold-sweep.v1",
        master_seed: 7,
        episodes: 4,
        cells: [10, 50, 90].map((percentile, i) => ({
            percentile,
            ttc_safe: 3.3 + i,
            tiv_safe: 1.3 + 0.5 * i,
            safety_violation_rate: 0.0,
            merged_rate: 1.0,
            hard_brake_rate: 0.3 - 0.1 * i,
            give_way_rate: 0.4 + 0.2 * i,
        })),
    };
}

/** Write a full case directory (trace + episode + scenario). */
export function writeCaseDir(dir: string, opts: { beliefs?: boolean; truncated?: boolean } = {}): string {
    fs.mkdirSync(dir, { recursive: true });
    fs.writeFileSync(path.join(dir, "trace.csv"), traceFixture(opts));
    fs.writeFileSync(path.join(dir, "episode.json"), JSON.stringify(episodeFixture(opts)));
    fs.writeFileSync(path.join(dir, "scenario.json"), JSON.stringify(scenarioFixture()));
    return dir;
}
