/**
 * The four figure layouts: iteration-sweep curves, case-study
 * time-series panels, belief-posterior heatmaps, and threshold-sweep
 * bars. Every function is pure (artifact in, SVG string out).
 */

import {
    CaseArtifact,
    EpisodeFile,
    MetricsCell,
    MetricsFile,
    ScenarioFile,
    SchemaMismatchError,
    SweepFile,
    METRICS_FORMAT,
    EPISODE_FORMAT,
    SWEEP_FORMAT,
    TRACE_FORMAT,
} from "./artifact";
import { SvgChart, agentColor, linearScale, logScale, niceTicks } from "./svg";

export type SweepMetric = "safety" | "reward" | "merge_time";

const METRIC_COLUMNS: Record<SweepMetric, { value: keyof MetricsCell; se: keyof MetricsCell | null; label: string }> = {
    safety: { value: "safety_violation_rate", se: null, label: "safety-violation rate" },
    reward: { value: "mean_reward", se: "se_reward", label: "mean episode reward" },
    merge_time: { value: "mean_merge_time", se: "se_merge_time", label: "mean time to merge [s]" },
};

export function plotIterationSweep(metrics: MetricsFile, metric: SweepMetric): string {
    const spec = METRIC_COLUMNS[metric];
    if (!spec) {
        throw new Error(`unknown metric ${metric}; expected safety|reward|merge_time`);
    }
    const sweep = [...metrics.sweep].sort((a, b) => a - b);
    const agents = [...new Set(metrics.results.map((c) => c.agent))];

    const chart = new SvgChart(520, 340);
    const x = logScale(sweep[0], sweep[sweep.length - 1], chart.plotLeft + 10, chart.plotRight - 10);

    // collect plotted values first so the y-domain covers the error bars
    interface Pt {
        iters: number;
        v: number;
        se: number;
    }
    const byAgent = new Map<string, Pt[]>();
    let flat: number[] = [];
    for (const cell of metrics.results) {
        if (!(spec.value in cell)) {
            throw new SchemaMismatchError("metrics.json", `column ${String(spec.value)}`, Object.keys(cell));
        }
        const v = cell[spec.value];
        if (v === null || typeof v !== "number") {
            continue; // cell carries no number for this metric (e.g. never merged)
        }
        const se = spec.se ? ((cell[spec.se] as number | null) ?? 0) : 0;
        const pts = byAgent.get(cell.agent) ?? [];
        pts.push({ iters: cell.iterations ?? 0, v, se });
        byAgent.set(cell.agent, pts);
        flat.push(v - 2 * se, v + 2 * se);
    }
    const lo = Math.min(...flat);
    const hi = Math.max(...flat);
    const pad = (hi - lo || 1) * 0.06;
    const y = linearScale(lo - pad, hi + pad, chart.plotBottom, chart.plotTop);

    chart.title(`${spec.label} vs planning iterations`);
    chart.xAxis(x, sweep, "planning iterations (log scale)");
    chart.yAxis(y, niceTicks(lo - pad, hi + pad), spec.label);

    for (const agent of agents) {
        const pts = (byAgent.get(agent) ?? []).sort((a, b) => a.iters - b.iters);
        const color = agentColor(agent);
        if (pts.length === 1 && pts[0].iters === 0) {
            // searchless agent: one budget-independent level, drawn flat
            const level = y(pts[0].v);
            chart.series(
                agent,
                [
                    { x: x(sweep[0]), y: level },
                    { x: x(sweep[sweep.length - 1]), y: level },
                ],
                color,
                { dash: "5,3" },
            );
            continue;
        }
        chart.series(
            agent,
            pts.map((p) => ({ x: x(p.iters), y: y(p.v) })),
            color,
        );
        const bars = pts
            .filter((p) => p.se > 0)
            .map((p) => ({ x: x(p.iters), lo: y(p.v - 2 * p.se), hi: y(p.v + 2 * p.se) }));
        if (bars.length > 0) {
            chart.errorBars(agent, bars, color);
        }
    }
    chart.legend(agents.map((a) => ({ label: a, color: agentColor(a) })));
    return chart.render({ masterSeed: metrics.master_seed, schema: METRICS_FORMAT });
}

export function plotCaseStudy(artifact: CaseArtifact): string {
    const { trace, episode, scenario } = artifact;
    const chart = new SvgChart(640, 560, { top: 30, bottom: 46 });
    const tMax = trace[trace.length - 1].t;
    const x = linearScale(0, tMax, chart.plotLeft + 4, chart.plotRight - 4);

    const posTop = chart.plotTop;
    const posBottom = 285;
    const spdTop = 330;
    const spdBottom = chart.plotBottom;

    const xs = trace.map((r) => r.ego_x).concat(trace.flatMap((r) => r.vehicles.map((v) => v.x)));
    const posY = linearScale(Math.min(...xs), Math.max(...xs), posBottom, posTop);
    const vs = trace.map((r) => r.ego_vx).concat(trace.flatMap((r) => r.vehicles.map((v) => v.vx)));
    const vLo = Math.min(...vs);
    const vHi = Math.max(...vs);
    const spdY = linearScale(vLo - 0.5, vHi + 0.5, spdBottom, spdTop);

    chart.title(`${scenario.name}: ${episode.agent}, outcome ${episode.outcome}`);

    // merge-zone band in the position panel
    const zone = [100, 200].map(posY);
    chart.rect(chart.plotLeft, Math.min(...zone), chart.plotRight - chart.plotLeft, Math.abs(zone[0] - zone[1]), "#f2f2f2");

    chart.xAxis(x, niceTicks(0, tMax, 8), "time [s]", { y: posBottom });
    chart.yAxis(posY, niceTicks(Math.min(...xs), Math.max(...xs), 6), "position x [m]", {
        top: posTop,
        bottom: posBottom,
    });
    chart.xAxis(x, niceTicks(0, tMax, 8), "time [s]", { y: spdBottom });
    chart.yAxis(spdY, niceTicks(vLo, vHi, 5), "speed [m/s]", { top: spdTop, bottom: spdBottom });

    const everyNth = <T,>(arr: T[], n: number) => arr.filter((_, i) => i % n === 0 || i === arr.length - 1);
    const egoColor = "#2ca02c";
    chart.series(
        "ego-position",
        everyNth(trace, 4).map((r) => ({ x: x(r.t), y: posY(r.ego_x) })),
        egoColor,
    );
    chart.series(
        "ego-speed",
        everyNth(trace, 4).map((r) => ({ x: x(r.t), y: spdY(r.ego_vx) })),
        egoColor,
    );
    for (let i = 0; i < trace[0].vehicles.length; i++) {
        const color = "#888888";
        chart.series(
            `vehicle-${i}-position`,
            everyNth(trace, 4).map((r) => ({ x: x(r.t), y: posY(r.vehicles[i].x) })),
            color,
        );
        chart.series(
            `vehicle-${i}-speed`,
            everyNth(trace, 4).map((r) => ({ x: x(r.t), y: spdY(r.vehicles[i].vx) })),
            color,
        );
    }

    // label each decision with the policy it started
    const labels: string[] = [];
    episode.decisions.forEach((d, idx) => {
        const lx = x(d.t);
        const ly = posTop + 12 + (idx % 3) * 11;
        labels.push(
            `<line x1="${lx}" y1="${posTop}" x2="${lx}" y2="${posBottom}" stroke="#bbbbbb" stroke-dasharray="2,3"/>`,
            `<text x="${lx + 2}" y="${ly}" font-size="8" fill="#444">${d.policy}</text>`,
        );
    });
    chart.group("decisions", labels);

    if (episode.merge_time !== null) {
        const mx = x(episode.merge_time);
        chart.group("merge-marker", [
            `<line x1="${mx}" y1="${posTop}" x2="${mx}" y2="${spdBottom}" stroke="${egoColor}" stroke-width="1.4"/>`,
        ]);
    }
    if (artifact.truncated) {
        chart.text(chart.plotLeft + 8, posTop + 14, "warning: trace truncated before episode end", 'font-size="11" fill="#c00000"');
    }
    chart.legend([
        { label: "ego", color: egoColor },
        { label: "traffic", color: "#888888" },
    ]);
    return chart.render({ masterSeed: episode.master_seed, schema: TRACE_FORMAT });
}

function heatColor(frac: number): string {
    const light = 97 - 72 * Math.max(0, Math.min(1, frac));
    return `hsl(220, 70%, ${light.toFixed(1)}%)`;
}

export function plotBeliefEvolution(
    episode: EpisodeFile,
    scenario: ScenarioFile,
    vehicleId: number,
): string {
    const snaps = episode.decisions.map((d) => d.belief);
    if (snaps.some((s) => s === null) || snaps.length === 0) {
        throw new Error(
            `episode of agent ${episode.agent} carries no belief snapshots; ` +
                `only belief-tracking agents log them`,
        );
    }
    const beliefs = snaps as NonNullable<(typeof snaps)[number]>[];
    if (vehicleId < 0 || vehicleId >= beliefs[0].length) {
        throw new Error(`vehicle ${vehicleId} out of range (0..${beliefs[0].length - 1})`);
    }
    const nLevels = beliefs[0][vehicleId].aggressiveness.length;
    const nCols = beliefs.length;

    const chart = new SvgChart(560, 330, { bottom: 48 });
    const x = linearScale(-0.5, nCols - 0.5, chart.plotLeft, chart.plotRight);
    const y = linearScale(-0.05, 1.05, chart.plotBottom, chart.plotTop);
    const cellW = (chart.plotRight - chart.plotLeft) / nCols;
    const cellH = (chart.plotBottom - chart.plotTop) / nLevels;

    chart.title(`posterior over vehicle ${vehicleId} aggressiveness`);
    const cells: string[] = [];
    beliefs.forEach((snap, col) => {
        const marg = snap[vehicleId].aggressiveness;
        const peak = Math.max(...marg);
        marg.forEach((mass, row) => {
            const cx = chart.plotLeft + col * cellW;
            const cy = y(row / (nLevels - 1)) - cellH / 2;
            cells.push(
                `<rect x="${cx.toFixed(2)}" y="${cy.toFixed(2)}" width="${cellW.toFixed(2)}" ` +
                    `height="${cellH.toFixed(2)}" fill="${heatColor(mass / (peak || 1))}"/>`,
            );
        });
    });
    chart.group("heatmap", cells);

    // ground truth, stepping wherever a scripted override rewrites it
    const spec = scenario.vehicles[vehicleId];
    if (typeof spec.psi === "number") {
        const changes: { t: number; psi: number }[] = [{ t: 0, psi: spec.psi }];
        for (const [tStr, patch] of Object.entries(scenario.overrides ?? {})) {
            const psi = patch[String(vehicleId)];
            if (psi !== undefined) {
                changes.push({ t: Number(tStr), psi });
            }
        }
        changes.sort((a, b) => a.t - b.t);
        const times = episode.decisions.map((d) => d.t);
        const pts = times.map((t, col) => {
            let current = changes[0].psi;
            for (const c of changes) {
                if (c.t <= t) {
                    current = c.psi;
                }
            }
            return { x: x(col), y: y(current) };
        });
        chart.series("true-psi", pts, "#d62728");
    }

    chart.xAxis(x, niceTicks(0, nCols - 1, Math.min(8, nCols)), "decision index", {
        format: (v) => String(Math.round(v)),
    });
    chart.yAxis(y, [0, 0.25, 0.5, 0.75, 1.0], "aggressiveness");
    chart.legend([{ label: "true value", color: "#d62728" }]);
    return chart.render({ masterSeed: episode.master_seed, schema: EPISODE_FORMAT });
}

export function plotThresholdSweep(sweep: SweepFile): string {
    const cells = [...sweep.cells].sort((a, b) => a.percentile - b.percentile);
    if (cells.length === 0) {
        throw new Error("threshold sweep holds no cells");
    }
    const chart = new SvgChart(520, 320);
    const rates = cells.flatMap((c) => [c.hard_brake_rate, c.give_way_rate]);
    const hi = Math.max(...rates, 0.01);
    const y = linearScale(0, hi * 1.1, chart.plotBottom, chart.plotTop);
    const slot = (chart.plotRight - chart.plotLeft) / cells.length;
    const barW = slot * 0.32;

    chart.title("rule-based calibration sweep");
    chart.yAxis(y, niceTicks(0, hi * 1.1), "episode rate");
    const hardColor = "#d62728";
    const giveColor = "#1f77b4";
    const bars: string[] = [];
    const labels: string[] = [];
    cells.forEach((c, i) => {
        const cx = chart.plotLeft + slot * (i + 0.5);
        bars.push(
            `<rect x="${(cx - barW - 1).toFixed(2)}" y="${y(c.hard_brake_rate).toFixed(2)}" ` +
                `width="${barW.toFixed(2)}" height="${(chart.plotBottom - y(c.hard_brake_rate)).toFixed(2)}" fill="${hardColor}"/>`,
            `<rect x="${(cx + 1).toFixed(2)}" y="${y(c.give_way_rate).toFixed(2)}" ` +
                `width="${barW.toFixed(2)}" height="${(chart.plotBottom - y(c.give_way_rate)).toFixed(2)}" fill="${giveColor}"/>`,
        );
        labels.push(
            `<text x="${cx.toFixed(2)}" y="${chart.plotBottom + 14}" text-anchor="middle" ` +
                `font-size="10">p${c.percentile}</text>`,
        );
    });
    chart.group("bars", bars);
    chart.group("percentile-labels", labels);
    chart.raw(
        `<line x1="${chart.plotLeft}" y1="${chart.plotBottom}" x2="${chart.plotRight}" ` +
            `y2="${chart.plotBottom}" stroke="black"/>`,
    );
    chart.text(
        (chart.plotLeft + chart.plotRight) / 2,
        chart.plotBottom + 30,
        "calibration percentile",
        'font-size="11" text-anchor="middle"',
    );
    chart.legend([
        { label: "hard-brake rate", color: hardColor },
        { label: "give-way rate", color: giveColor },
    ]);
    return chart.render({ masterSeed: sweep.master_seed, schema: SWEEP_FORMAT });
}
