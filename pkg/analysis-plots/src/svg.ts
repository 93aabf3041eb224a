/**
 * Minimal SVG scene builder: enough axes, series, and legends for the
 * four figure layouts, with run provenance embedded in every file.
 */

export interface Margin {
    top: number;
    right: number;
    bottom: number;
    left: number;
}

export type Scale = (v: number) => number;

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
    const span = d1 - d0 || 1;
    return (v) => r0 + ((v - d0) / span) * (r1 - r0);
}

export function logScale(d0: number, d1: number, r0: number, r1: number): Scale {
    const l0 = Math.log(d0);
    const span = Math.log(d1) - l0 || 1;
    return (v) => r0 + ((Math.log(v) - l0) / span) * (r1 - r0);
}

/** Round-ish tick positions inside [lo, hi]. */
export function niceTicks(lo: number, hi: number, n = 5): number[] {
    if (!(hi > lo)) {
        return [lo];
    }
    const rawStep = (hi - lo) / n;
    const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
    const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => s >= rawStep)!;
    const first = Math.ceil(lo / step) * step;
    const ticks = [];
    for (let v = first; v <= hi + 1e-9; v += step) {
        ticks.push(Number(v.toFixed(10)));
    }
    return ticks;
}

function esc(text: string): string {
    return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

const fmt = (v: number) => Number(v.toFixed(4)).toString();

export class SvgChart {
    readonly width: number;
    readonly height: number;
    readonly margin: Margin;
    private body: string[] = [];

    constructor(width: number, height: number, margin?: Partial<Margin>) {
        this.width = width;
        this.height = height;
        this.margin = { top: 34, right: 16, bottom: 42, left: 58, ...margin };
    }

    get plotLeft(): number {
        return this.margin.left;
    }
    get plotRight(): number {
        return this.width - this.margin.right;
    }
    get plotTop(): number {
        return this.margin.top;
    }
    get plotBottom(): number {
        return this.height - this.margin.bottom;
    }

    raw(fragment: string): void {
        this.body.push(fragment);
    }

    group(id: string, fragments: string[]): void {
        this.body.push(`<g id="${esc(id)}">`, ...fragments, "</g>");
    }

    title(text: string): void {
        this.body.push(
            `<text x="${this.width / 2}" y="18" text-anchor="middle" ` +
                `font-size="13" font-weight="bold">${esc(text)}</text>`,
        );
    }

    xAxis(
        scale: Scale,
        ticks: number[],
        label: string,
        opts?: { format?: (v: number) => string; y?: number },
    ): void {
        const y = opts?.y ?? this.plotBottom;
        const format = opts?.format ?? String;
        const parts = [
            `<line x1="${this.plotLeft}" y1="${y}" x2="${this.plotRight}" y2="${y}" stroke="black"/>`,
        ];
        for (const t of ticks) {
            const x = fmt(scale(t));
            parts.push(
                `<line x1="${x}" y1="${y}" x2="${x}" y2="${y + 4}" stroke="black"/>`,
                `<text x="${x}" y="${y + 16}" text-anchor="middle" font-size="10">` +
                    `${esc(format(t))}</text>`,
            );
        }
        parts.push(
            `<text x="${(this.plotLeft + this.plotRight) / 2}" y="${y + 32}" ` +
                `text-anchor="middle" font-size="11">${esc(label)}</text>`,
        );
        this.group(`x-axis-${fmt(y)}`, parts);
    }

    yAxis(
        scale: Scale,
        ticks: number[],
        label: string,
        opts?: { top?: number; bottom?: number },
    ): void {
        const x = this.plotLeft;
        const top = opts?.top ?? this.plotTop;
        const bottom = opts?.bottom ?? this.plotBottom;
        const parts = [
            `<line x1="${x}" y1="${top}" x2="${x}" y2="${bottom}" stroke="black"/>`,
        ];
        for (const t of ticks) {
            const y = fmt(scale(t));
            parts.push(
                `<line x1="${x - 4}" y1="${y}" x2="${x}" y2="${y}" stroke="black"/>`,
                `<text x="${x - 7}" y="${y}" text-anchor="end" dominant-baseline="middle" ` +
                    `font-size="10">${esc(String(t))}</text>`,
            );
        }
        parts.push(
            `<text transform="rotate(-90 14 ${(top + bottom) / 2})" ` +
                `x="14" y="${(top + bottom) / 2}" text-anchor="middle" ` +
                `font-size="11">${esc(label)}</text>`,
        );
        this.group(`y-axis-${fmt(top)}`, parts);
    }

    /** Polyline with point markers; id names the series for inspection. */
    series(
        id: string,
        points: { x: number; y: number }[],
        color: string,
        opts?: { dash?: string },
    ): void {
        const path = points.map((p) => `${fmt(p.x)},${fmt(p.y)}`).join(" ");
        const parts = [
            `<polyline points="${path}" fill="none" stroke="${color}" stroke-width="1.6"` +
                (opts?.dash ? ` stroke-dasharray="${opts.dash}"` : "") +
                `/>`,
        ];
        for (const p of points) {
            parts.push(`<circle cx="${fmt(p.x)}" cy="${fmt(p.y)}" r="2.6" fill="${color}"/>`);
        }
        this.group(`series-${id}`, parts);
    }

    errorBars(
        id: string,
        bars: { x: number; lo: number; hi: number }[],
        color: string,
    ): void {
        const parts = bars.map(
            (b) =>
                `<line x1="${fmt(b.x)}" y1="${fmt(b.lo)}" x2="${fmt(b.x)}" y2="${fmt(b.hi)}" ` +
                `stroke="${color}" stroke-width="1"/>`,
        );
        this.group(`errors-${id}`, parts);
    }

    rect(x: number, y: number, w: number, h: number, fill: string, extra = ""): void {
        this.body.push(
            `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" ` +
                `fill="${fill}" ${extra}/>`,
        );
    }

    text(x: number, y: number, content: string, extra = 'font-size="10"'): void {
        this.body.push(`<text x="${fmt(x)}" y="${fmt(y)}" ${extra}>${esc(content)}</text>`);
    }

    legend(entries: { label: string; color: string }[]): void {
        const parts: string[] = [];
        let y = this.plotTop + 4;
        for (const e of entries) {
            const x = this.plotRight - 108;
            parts.push(
                `<rect x="${x}" y="${y - 8}" width="10" height="10" fill="${e.color}"/>`,
                `<text x="${x + 14}" y="${y}" font-size="10">${esc(e.label)}</text>`,
            );
            y += 14;
        }
        this.group("legend", parts);
    }

    /** Final document; provenance goes in <metadata> and a visible caption. */
    render(meta: { masterSeed: number; schema: string }): string {
        const caption = `seed ${meta.masterSeed} | ${meta.schema}`;
        return [
            `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" ` +
                `height="${this.height}" viewBox="0 0 ${this.width} ${this.height}" ` +
                `font-family="sans-serif">`,
            `<metadata>${esc(JSON.stringify(meta))}</metadata>`,
            `<rect width="${this.width}" height="${this.height}" fill="white"/>`,
            ...this.body,
            `<text x="${this.width - 6}" y="${this.height - 6}" text-anchor="end" ` +
                `font-size="8" fill="#777">${esc(caption)}</text>`,
            `</svg>`,
        ].join("\n");
    }
}

export const AGENT_COLORS: Record<string, string> = {
    lvt: "#1f77b4",
    omniscient: "#2ca02c",
    "mcts-prior": "#ff7f0e",
    "mcts-normal": "#d62728",
    qmdp: "#9467bd",
    "rule-based": "#8c564b",
};

export function agentColor(agent: string): string {
    return AGENT_COLORS[agent] ?? "#333333";
}
