// Line grammar of the control protocol, as seen from the browser side.
// One line per WebSocket text frame (the gateway strips/adds the newline).

export const PROTOCOL_VERSION = 1;
export const N_PARTS = 21;
export const PLAYER_BLOCK_FIELDS = 63 + 63 + 9 + 20 + 2 + 1;

export interface PlayerBlock {
    positions: number[];      // 63: part-id order, x y z
    velocities: number[];     // 63
    groinRotation: number[];  // 9, row-major
    jointModes: number[];     // 20
    grips: number[];          // 2
    injury: number;
}

export interface StateMsg {
    kind: "state";
    terminal: boolean;
    framesPlayed: number;
    nextTurnframes: number;
    players: [PlayerBlock, PlayerBlock];
    winner: number;           // 0 none, 1 player1, 2 player2, 3 draw
}

export interface FrameMsg {
    kind: "frame";
    frameIndex: number;
    players: [PlayerBlock, PlayerBlock];
}

export interface OkMsg { kind: "ok"; }
export interface ErrMsg { kind: "err"; code: string; text: string; }

export type ServerMsg = StateMsg | FrameMsg | OkMsg | ErrMsg;

export class WireError extends Error {}

function parseBlock(fields: string[], base: number): PlayerBlock {
    const nums = (off: number, n: number) => {
        const out: number[] = [];
        for (let k = 0; k < n; k++) {
            const v = Number(fields[base + off + k]);
            if (!Number.isFinite(v)) {
                throw new WireError(`bad number at field ${base + off + k}`);
            }
            out.push(v);
        }
        return out;
    };
    return {
        positions: nums(0, 63),
        velocities: nums(63, 63),
        groinRotation: nums(126, 9),
        jointModes: nums(135, 20),
        grips: nums(155, 2),
        injury: nums(157, 1)[0],
    };
}

export function parseServerLine(line: string): ServerMsg {
    const fields = line.replace(/\n$/, "").split(" ");
    const tag = fields[0];
    if (tag === "OK") {
        return { kind: "ok" };
    }
    if (tag === "ERR") {
        if (fields.length < 3) throw new WireError("short ERR line");
        return { kind: "err", code: fields[1], text: fields.slice(2).join(" ") };
    }
    if (tag === "STATE") {
        const expected = 3 + 2 * PLAYER_BLOCK_FIELDS + 1;
        if (fields.length - 1 !== expected) {
            throw new WireError(`STATE needs ${expected} fields, got ${fields.length - 1}`);
        }
        return {
            kind: "state",
            terminal: fields[1] === "1",
            framesPlayed: Number(fields[2]),
            nextTurnframes: Number(fields[3]),
            players: [parseBlock(fields, 4), parseBlock(fields, 4 + PLAYER_BLOCK_FIELDS)],
            winner: Number(fields[4 + 2 * PLAYER_BLOCK_FIELDS]),
        };
    }
    if (tag === "FRAME") {
        const expected = 1 + 2 * PLAYER_BLOCK_FIELDS;
        if (fields.length - 1 !== expected) {
            throw new WireError(`FRAME needs ${expected} fields, got ${fields.length - 1}`);
        }
        return {
            kind: "frame",
            frameIndex: Number(fields[1]),
            players: [parseBlock(fields, 2), parseBlock(fields, 2 + PLAYER_BLOCK_FIELDS)],
        };
    }
    throw new WireError(`unknown tag ${tag}`);
}

export function encodeHello(): string {
    return `HELLO ${PROTOCOL_VERSION}`;
}

export function encodeSettings(tag: "NEWGAME" | "RESET", settings: Record<string, string>): string {
    const parts = [tag as string];
    for (const key of Object.keys(settings).sort()) {
        parts.push(`${key}=${settings[key]}`);
    }
    return parts.join(" ");
}

export function validEntries(entries: (number | null)[]): entries is number[] {
    if (entries.length !== 22) return false;
    return entries.every((e, i) => {
        if (e === null || !Number.isInteger(e)) return false;
        const hi = i < 20 ? 4 : 2;
        return e >= 1 && e <= hi;
    });
}

export function encodeAct(player: number, entries: number[] | null): string {
    if (entries === null) {
        return `ACT ${player} -`;
    }
    if (!validEntries(entries)) {
        throw new WireError("invalid action entries");
    }
    return `ACT ${player} ${entries.join(" ")}`;
}

export const encodeStep = (): string => "STEP";
export const encodeQuit = (): string => "QUIT";
