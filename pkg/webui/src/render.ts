// Orthographic two-pane scene: side elevation (x-z) on the left, top-down
// (x-y) on the right, drawn from the 21 part positions per player plus the
// dojo circle, injuries, frame counters and the terminal banner.
//
// Radii and the joint chain mirror the shipped default character file; the
// wire carries only positions, so a part is drawn as detached when it sits
// much farther from its joint partner than the rest geometry allows.

import { StateMsg } from "./protocol.js";

export const PART_RADII = [
    16, 20, 20, 18, 18,          // head, breast, chest, stomach, groin
    14, 14, 14, 14, 12, 12, 10, 10,   // pecs, biceps, triceps, hands
    16, 16, 20, 20, 16, 16, 12, 12,   // butts, thighs, legs, feet
] as const;

// [parent part, child part] per joint, part ids as in the protocol doc
export const JOINT_LINKS: ReadonlyArray<readonly [number, number]> = [
    [1, 0], [2, 1], [3, 2], [4, 3],
    [1, 5], [1, 6], [5, 7], [6, 8], [7, 9], [8, 10], [9, 11], [10, 12],
    [4, 13], [4, 14], [13, 15], [14, 16], [15, 17], [16, 18], [17, 19], [18, 20],
];

// rest distances between linked part centers in the default character
const REST_LINK_LENGTH = [
    55.1, 35.1, 40.1, 40.0,
    28.2, 28.2, 32.0, 32.0, 35.0, 35.0, 30.0, 30.0,
    36.2, 36.2, 55.5, 55.5, 60.3, 60.3, 43.1, 43.1,
] as const;
const DETACH_FACTOR = 2.5;

export const PLAYER_COLORS = ["#2b6cb0", "#c05621"] as const;

// The subset of CanvasRenderingContext2D the scene needs; tests supply a
// recording fake.
export interface SceneContext {
    fillStyle: string | CanvasGradient | CanvasPattern;
    strokeStyle: string | CanvasGradient | CanvasPattern;
    lineWidth: number;
    font: string;
    clearRect(x: number, y: number, w: number, h: number): void;
    fillRect(x: number, y: number, w: number, h: number): void;
    beginPath(): void;
    arc(x: number, y: number, r: number, a0: number, a1: number): void;
    moveTo(x: number, y: number): void;
    lineTo(x: number, y: number): void;
    stroke(): void;
    fill(): void;
    fillText(text: string, x: number, y: number): void;
}

export interface SceneOptions {
    width: number;
    height: number;
    dojoRadius: number;   // 0 hides the circle
    matchframes: number;
    worldSpan: number;    // world units mapped to one pane's width
}

export const DEFAULT_SCENE: SceneOptions = {
    width: 960,
    height: 420,
    dojoRadius: 375,
    matchframes: 500,
    worldSpan: 1000,
};

export class RenderError extends Error {}

function checkState(state: StateMsg): void {
    for (const p of state.players) {
        if (p.positions.length !== 63) {
            throw new RenderError("malformed state: positions");
        }
        for (const v of p.positions) {
            if (!Number.isFinite(v)) {
                throw new RenderError("malformed state: non-finite position");
            }
        }
    }
}

function part(state: StateMsg, player: number, id: number): [number, number, number] {
    const p = state.players[player].positions;
    return [p[3 * id], p[3 * id + 1], p[3 * id + 2]];
}

export function renderState(ctx: SceneContext, state: StateMsg, opts: SceneOptions = DEFAULT_SCENE): void {
    // Raises on malformed input before touching the canvas, so the caller
    // can keep the last good frame and show an error banner.
    checkState(state);

    const paneW = opts.width / 2;
    const scale = paneW / opts.worldSpan;
    const sideX = (x: number) => paneW / 2 + x * scale;
    const sideY = (z: number) => opts.height * 0.88 - z * scale;
    const topX = (x: number) => paneW + paneW / 2 + x * scale;
    const topY = (y: number) => opts.height / 2 + y * scale;

    ctx.clearRect(0, 0, opts.width, opts.height);
    ctx.fillStyle = "#f7f5f0";
    ctx.fillRect(0, 0, opts.width, opts.height);

    // ground line (side pane)
    ctx.strokeStyle = "#555";
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(0, sideY(0));
    ctx.lineTo(paneW, sideY(0));
    ctx.stroke();

    // dojo circle (top pane)
    if (opts.dojoRadius > 0) {
        ctx.strokeStyle = "#999";
        ctx.beginPath();
        ctx.arc(topX(0), topY(0), opts.dojoRadius * scale, 0, 2 * Math.PI);
        ctx.stroke();
    }

    for (let player = 0; player < 2; player++) {
        ctx.strokeStyle = PLAYER_COLORS[player];
        ctx.fillStyle = PLAYER_COLORS[player];
        // joint links, skipped when the parts have clearly separated
        for (let j = 0; j < JOINT_LINKS.length; j++) {
            const [a, b] = JOINT_LINKS[j];
            const pa = part(state, player, a);
            const pb = part(state, player, b);
            const d = Math.hypot(pa[0] - pb[0], pa[1] - pb[1], pa[2] - pb[2]);
            if (d > REST_LINK_LENGTH[j] * DETACH_FACTOR) {
                continue;  // detached limb: no connecting line
            }
            ctx.lineWidth = 2;
            ctx.beginPath();
            ctx.moveTo(sideX(pa[0]), sideY(pa[2]));
            ctx.lineTo(sideX(pb[0]), sideY(pb[2]));
            ctx.stroke();
            ctx.beginPath();
            ctx.moveTo(topX(pa[0]), topY(pa[1]));
            ctx.lineTo(topX(pb[0]), topY(pb[1]));
            ctx.stroke();
        }
        for (let id = 0; id < 21; id++) {
            const [x, y, z] = part(state, player, id);
            const r = Math.max(2, PART_RADII[id] * scale);
            ctx.beginPath();
            ctx.arc(sideX(x), sideY(z), r, 0, 2 * Math.PI);
            ctx.fill();
            ctx.beginPath();
            ctx.arc(topX(x), topY(y), r, 0, 2 * Math.PI);
            ctx.fill();
        }
    }

    // scores: each side sees the opponent's injury as its score
    ctx.fillStyle = "#222";
    ctx.font = "14px sans-serif";
    const inj0 = state.players[0].injury;
    const inj1 = state.players[1].injury;
    ctx.fillText(`P1 score ${inj1.toFixed(0)} (injury ${inj0.toFixed(0)})`, 12, 20);
    ctx.fillText(`P2 score ${inj0.toFixed(0)} (injury ${inj1.toFixed(0)})`, 12, 38);
    const framesLeft = Math.max(0, opts.matchframes - state.framesPlayed);
    ctx.fillText(`frames left ${framesLeft}  next turn ${state.nextTurnframes}`, 12, 56);

    if (state.terminal) {
        ctx.fillStyle = "#7a1f1f";
        ctx.font = "20px sans-serif";
        const text =
            state.winner === 3 ? "draw" :
            state.winner === 1 ? "Player 1 wins" :
            state.winner === 2 ? "Player 2 wins" : "match over";
        ctx.fillText(text, opts.width / 2 - 60, 28);
    }
}

export function renderErrorBanner(ctx: SceneContext, message: string, opts: SceneOptions = DEFAULT_SCENE): void {
    ctx.fillStyle = "#7a1f1f";
    ctx.font = "14px sans-serif";
    ctx.fillText(`error: ${message}`, 12, opts.height - 12);
}
