/**
 * Run-artifact loading. Every reader checks the embedded schema tag and
 * refuses anything it does not recognise, so stale or foreign files fail
 * here instead of producing silently wrong figures.
 */

import * as fs from "fs";
import * as path from "path";
import Papa from "papaparse";

export const METRICS_FORMAT = "mergesim.metrics.v1";
export const TRACE_FORMAT = "mergesim.trace.v1";
export const EPISODE_FORMAT = "mergesim.episode.v1";
export const SCENARIO_FORMAT = "mergesim.scenario.v1";
export const SWEEP_FORMAT = "mergesim.threshold-sweep.v1";

export class SchemaMismatchError extends Error {
    constructor(file: string, expected: string, got: unknown) {
        super(`${file}: expected schema ${expected}, got ${JSON.stringify(got)}`);
        this.name = "SchemaMismatchError";
    }
}

export interface MetricsCell {
    agent: string;
    iterations: number | null;
    episodes: number;
    safety_violation_rate: number;
    mean_reward: number;
    se_reward: number;
    mean_merge_time: number | null;
    se_merge_time: number | null;
    hard_brake_rate: number;
    give_way_rate: number;
    merged_rate: number;
}

export interface MetricsFile {
    master_seed: number;
    episodes: number;
    sweep: number[];
    results: MetricsCell[];
}

export interface TraceRow {
    t: number;
    policy: string;
    ego_x: number;
    ego_y: number;
    ego_vx: number;
    merged: boolean | null;
    vehicles: { x: number; y: number; vx: number }[];
}

export interface BeliefSnapshot {
    aggressiveness: number[];
    attentive: number;
}

export interface Decision {
    t: number;
    policy: string;
    arms: { policy: string; visits: number; value: number }[] | null;
    belief: BeliefSnapshot[] | null;
}

export interface EpisodeFile {
    agent: string;
    master_seed: number;
    scenario: string;
    outcome: string;
    merge_time: number | null;
    decisions: Decision[];
}

export interface ScenarioFile {
    name: string;
    ego_x: number;
    ego_vx: number;
    vehicles: { x: number; y: number; vx: number; psi: number | string }[];
    overrides: Record<string, Record<string, number>>;
}

export interface SweepCell {
    percentile: number;
    ttc_safe: number;
    tiv_safe: number;
    safety_violation_rate: number;
    merged_rate: number;
    hard_brake_rate: number;
    give_way_rate: number;
}

export interface SweepFile {
    master_seed: number;
    episodes: number;
    cells: SweepCell[];
}

function readJson(file: string, expected: string): any {
    const data = JSON.parse(fs.readFileSync(file, "utf8"));
    if (data.format !== expected) {
        throw new SchemaMismatchError(file, expected, data.format);
    }
    return data;
}

export function readMetrics(file: string): MetricsFile {
    const data = readJson(file, METRICS_FORMAT);
    for (const cell of data.results) {
        for (const key of ["agent", "safety_violation_rate", "mean_reward"]) {
            if (!(key in cell)) {
                throw new SchemaMismatchError(file, `metrics cell with ${key}`, cell);
            }
        }
    }
    return data as MetricsFile;
}

export function readEpisode(file: string): EpisodeFile {
    return readJson(file, EPISODE_FORMAT) as EpisodeFile;
}

export function readScenario(file: string): ScenarioFile {
    return readJson(file, SCENARIO_FORMAT) as ScenarioFile;
}

export function readThresholdSweep(file: string): SweepFile {
    return readJson(file, SWEEP_FORMAT) as SweepFile;
}

/** Parse the wide per-step trace; vehicle count is inferred from the header. */
export function readTrace(file: string): TraceRow[] {
    const text = fs.readFileSync(file, "utf8");
    const parsed = Papa.parse<Record<string, string>>(text.trim(), {
        header: true,
        skipEmptyLines: true,
    });
    if (parsed.errors.length > 0) {
        throw new SchemaMismatchError(file, TRACE_FORMAT, parsed.errors[0].message);
    }
    const cols = parsed.meta.fields ?? [];
    if (cols[0] !== "schema" || !cols.includes("ego_x")) {
        throw new SchemaMismatchError(file, TRACE_FORMAT, cols.slice(0, 3));
    }
    const nVehicles = cols.filter((c) => /^v\d+_x$/.test(c)).length;
    const rows: TraceRow[] = [];
    for (const raw of parsed.data) {
        if (raw.schema !== TRACE_FORMAT) {
            throw new SchemaMismatchError(file, TRACE_FORMAT, raw.schema);
        }
        const vehicles = [];
        for (let i = 0; i < nVehicles; i++) {
            vehicles.push({
                x: Number(raw[`v${i}_x`]),
                y: Number(raw[`v${i}_y`]),
                vx: Number(raw[`v${i}_vx`]),
            });
        }
        rows.push({
            t: Number(raw.t),
            policy: raw.policy,
            ego_x: Number(raw.ego_x),
            ego_y: Number(raw.ego_y),
            ego_vx: Number(raw.ego_vx),
            merged: raw.merged === "" ? null : raw.merged === "1",
            vehicles,
        });
    }
    if (rows.length === 0) {
        throw new SchemaMismatchError(file, TRACE_FORMAT, "empty trace");
    }
    return rows;
}

/** One case-study directory: trace + episode + scenario, cross-checked. */
export interface CaseArtifact {
    trace: TraceRow[];
    episode: EpisodeFile;
    scenario: ScenarioFile;
    truncated: boolean;
}

export function readCaseDir(dir: string): CaseArtifact {
    const trace = readTrace(path.join(dir, "trace.csv"));
    const episode = readEpisode(path.join(dir, "episode.json"));
    const scenario = readScenario(path.join(dir, "scenario.json"));
    const last = trace[trace.length - 1];
    // a finished trace ends with the terminal row (no action recorded)
    const truncated = last.policy !== "";
    return { trace, episode, scenario, truncated };
}
