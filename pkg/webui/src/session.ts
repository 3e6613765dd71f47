// Lockstep match session: the state machine guarantees exactly one
// ACT(+delegation)+STEP triple per turn, no matter how eagerly the submit
// button is clicked.  All UI state derives from the last STATE message.

import {
    ErrMsg,
    StateMsg,
    encodeAct,
    encodeHello,
    encodeSettings,
    parseServerLine,
} from "./protocol.js";
import { Transport } from "./transport.js";

export type Phase =
    | "handshake"
    | "configuring"
    | "turn_input"    // a state is displayed, waiting for the human
    | "stepping"      // ACT+STEP sent, waiting for the next STATE
    | "terminal"
    | "failed";

export interface PresetSpec {
    id: string;
    settings: Record<string, string>;
}

export const PRESETS: Record<string, PresetSpec> = {
    "aikido-dojo-v1": {
        id: "aikido-dojo-v1",
        settings: {
            matchframes: "500",
            turnframes: "10,15,20,25,30,35,40,45,50",
            dojo_radius: "375.0",
            dq: "1",
            dismemberment: "1",
            engagement_distance: "150.0",
        },
    },
    "destroy-uke-v1": {
        id: "destroy-uke-v1",
        settings: {
            matchframes: "1000",
            turnframes: "10",
            dojo_radius: "0.0",
            dq: "0",
            dismemberment: "1",
            engagement_distance: "150.0",
        },
    },
};

export interface SessionOptions {
    preset: string;
    side: 0 | 1;          // which player the human controls
    opponent: "random" | "immobile";
    seed: number;
}

export class MatchSession {
    phase: Phase = "handshake";
    state: StateMsg | null = null;
    lastError: ErrMsg | null = null;
    readonly opts: SessionOptions;

    private transport: Transport;
    private stateHandler: (s: StateMsg) => void = () => undefined;
    private phaseHandler: (p: Phase) => void = () => undefined;
    private errorHandler: (e: ErrMsg) => void = () => undefined;

    constructor(transport: Transport, opts: SessionOptions) {
        this.transport = transport;
        this.opts = opts;
        transport.onLine((line) => this.handleLine(line));
    }

    onState(handler: (s: StateMsg) => void): void {
        this.stateHandler = handler;
    }

    onPhase(handler: (p: Phase) => void): void {
        this.phaseHandler = handler;
    }

    onError(handler: (e: ErrMsg) => void): void {
        this.errorHandler = handler;
    }

    start(): void {
        this.transport.send(encodeHello());
    }

    private setPhase(p: Phase): void {
        this.phase = p;
        this.phaseHandler(p);
    }

    private settings(): Record<string, string> {
        const preset = PRESETS[this.opts.preset];
        return {
            ...preset.settings,
            seed: String(this.opts.seed),
            opponent: this.opts.opponent,
        };
    }

    private handleLine(line: string): void {
        const msg = parseServerLine(line);
        if (msg.kind === "err") {
            this.lastError = msg;
            this.errorHandler(msg);
            if (msg.code === "version-mismatch") {
                this.setPhase("failed");
            } else if (this.phase === "stepping") {
                // session stays at the last good state; let the human retry
                this.setPhase("turn_input");
            }
            return;
        }
        if (msg.kind === "ok") {
            if (this.phase === "handshake") {
                this.setPhase("configuring");
                this.transport.send(encodeSettings("NEWGAME", this.settings()));
            }
            return;
        }
        if (msg.kind === "state") {
            this.state = msg;
            this.setPhase(msg.terminal ? "terminal" : "turn_input");
            this.stateHandler(msg);
            return;
        }
        // FRAME lines (replay streaming) are not part of the play loop
    }

    /** Submit the human's turn.  Emits exactly one ACT for the human, one
     * delegation for the opponent, and one STEP; further calls are ignored
     * until the next STATE arrives. */
    submitTurn(entries: number[]): boolean {
        if (this.phase !== "turn_input") {
            return false;
        }
        this.setPhase("stepping");
        const mine = encodeAct(this.opts.side, entries);
        const theirs = encodeAct(1 - this.opts.side, null);
        if (this.opts.side === 0) {
            this.transport.send(mine);
            this.transport.send(theirs);
        } else {
            this.transport.send(theirs);
            this.transport.send(mine);
        }
        this.transport.send("STEP");
        return true;
    }

    /** Offer a rematch after a terminal state. */
    rematch(seed?: number): boolean {
        if (this.phase !== "terminal") {
            return false;
        }
        if (seed !== undefined) {
            this.opts.seed = seed;
        }
        this.setPhase("configuring");
        this.transport.send(encodeSettings("RESET", this.settings()));
        return true;
    }

    quit(): void {
        this.transport.send("QUIT");
        this.transport.close();
    }
}
