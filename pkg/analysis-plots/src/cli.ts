#!/usr/bin/env node
/**
 * plots <sweep|case|belief|thresholds> --run <dir> --out <dir>
 *
 * Reads a simulator run directory and writes SVG figures. The command
 * never mutates the run directory, so re-running is idempotent.
 */

import * as fs from "fs";
import * as path from "path";

import { readCaseDir, readMetrics, readThresholdSweep } from "./artifact";
import {
    SweepMetric,
    plotBeliefEvolution,
    plotCaseStudy,
    plotIterationSweep,
    plotThresholdSweep,
} from "./charts";

interface Args {
    command: string;
    run: string;
    out: string;
    metric?: string;
    vehicle?: number;
}

function parseArgs(argv: string[]): Args {
    const [command, ...rest] = argv;
    const args: Args = { command: command ?? "", run: "", out: "figures" };
    for (let i = 0; i < rest.length; i++) {
        switch (rest[i]) {
            case "--run":
                args.run = rest[++i];
                break;
            case "--out":
                args.out = rest[++i];
                break;
            case "--metric":
                args.metric = rest[++i];
                break;
            case "--vehicle":
                args.vehicle = Number(rest[++i]);
                break;
            default:
                throw new Error(`unknown argument ${rest[i]}`);
        }
    }
    if (!args.run) {
        throw new Error("--run <dir> is required");
    }
    return args;
}

function writeFigure(outDir: string, name: string, svg: string): void {
    fs.mkdirSync(outDir, { recursive: true });
    const file = path.join(outDir, name);
    fs.writeFileSync(file, svg);
    console.log(`wrote ${file}`);
}

/** Case directories under --run: either one case or a folder of them. */
function caseDirs(run: string): string[] {
    if (fs.existsSync(path.join(run, "trace.csv"))) {
        return [run];
    }
    const subs = fs
        .readdirSync(run)
        .filter((d) => fs.existsSync(path.join(run, d, "trace.csv")))
        .map((d) => path.join(run, d))
        .sort();
    if (subs.length === 0) {
        throw new Error(`no trace.csv under ${run}`);
    }
    return subs;
}

function cmdSweep(args: Args): void {
    const metrics = readMetrics(path.join(args.run, "metrics.json"));
    const wanted = args.metric
        ? [args.metric as SweepMetric]
        : (["safety", "reward", "merge_time"] as SweepMetric[]);
    for (const metric of wanted) {
        writeFigure(args.out, `sweep-${metric.replace("_", "-")}.svg`, plotIterationSweep(metrics, metric));
    }
}

function cmdCase(args: Args): void {
    for (const dir of caseDirs(args.run)) {
        const artifact = readCaseDir(dir);
        writeFigure(args.out, `${path.basename(dir)}.svg`, plotCaseStudy(artifact));
    }
}

function cmdBelief(args: Args): void {
    for (const dir of caseDirs(args.run)) {
        const artifact = readCaseDir(dir);
        const ids =
            args.vehicle !== undefined
                ? [args.vehicle]
                : artifact.scenario.vehicles.map((_, i) => i);
        for (const id of ids) {
            writeFigure(
                args.out,
                `${path.basename(dir)}-belief-v${id}.svg`,
                plotBeliefEvolution(artifact.episode, artifact.scenario, id),
            );
        }
    }
}

function cmdThresholds(args: Args): void {
    const file = fs.statSync(args.run).isDirectory()
        ? path.join(args.run, "threshold_sweep.json")
        : args.run;
    writeFigure(args.out, "threshold-sweep.svg", plotThresholdSweep(readThresholdSweep(file)));
}

export function main(argv: string[]): number {
    let args: Args;
    try {
        args = parseArgs(argv);
    } catch (err) {
        console.error(`error: ${(err as Error).message}`);
        console.error("usage: plots <sweep|case|belief|thresholds> --run <dir> --out <dir>");
        return 2;
    }
    try {
        switch (args.command) {
            case "sweep":
                cmdSweep(args);
                break;
            case "case":
                cmdCase(args);
                break;
            case "belief":
                cmdBelief(args);
                break;
            case "thresholds":
                cmdThresholds(args);
                break;
            default:
                console.error(`unknown command ${args.command || "(none)"}`);
                console.error("usage: plots <sweep|case|belief|thresholds> --run <dir> --out <dir>");
                return 2;
        }
    } catch (err) {
        console.error(`error: ${(err as Error).message}`);
        return 1;
    }
    return 0;
}

if (require.main === module) {
    process.exit(main(process.argv.slice(2)));
}
