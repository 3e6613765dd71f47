// Test doubles: a scripted stub gateway and a recording canvas context.

import { Transport } from "../src/transport.js";

export class FakeTransport implements Transport {
    sent: string[] = [];
    closed = false;
    private lineHandler: (line: string) => void = () => undefined;
    private closeHandler: () => void = () => undefined;
    private openHandler: () => void = () => undefined;

    send(line: string): void {
        this.sent.push(line);
    }

    close(): void {
        this.closed = true;
        this.closeHandler();
    }

    onLine(handler: (line: string) => void): void {
        this.lineHandler = handler;
    }

    onClose(handler: () => void): void {
        this.closeHandler = handler;
    }

    onOpen(handler: () => void): void {
        this.openHandler = handler;
    }

    // test controls
    open(): void {
        this.openHandler();
    }

    feed(line: string): void {
        this.lineHandler(line);
    }
}

/** Stub gateway that behaves like the server for one scripted match: OK on
 * HELLO, then one canned STATE per NEWGAME/RESET/STEP. */
export class StubGateway extends FakeTransport {
    private states: string[];
    private cursor = 0;
    transcript: string[] = [];

    constructor(states: string[]) {
        super();
        this.states = states;
    }

    override send(line: string): void {
        super.send(line);
        this.transcript.push("C: " + line);
        const tag = line.split(" ")[0];
        if (tag === "HELLO") {
            this.reply("OK");
        } else if (tag === "NEWGAME" || tag === "RESET" || tag === "STEP") {
            if (this.cursor >= this.states.length) {
                this.reply("ERR bad-order out of scripted states");
                return;
            }
            this.reply(this.states[this.cursor]);
            this.cursor += 1;
        }
        // ACT lines are accepted silently, like the real server
    }

    private reply(line: string): void {
        this.transcript.push("S: " + line);
        this.feed(line);
    }
}

/** Minimal recording canvas: every drawing call is logged; coordinates are
 * checked to be finite. */
export class FakeCanvas {
    calls: string[] = [];
    fillStyle = "";
    strokeStyle = "";
    lineWidth = 0;
    font = "";

    private log(name: string, ...args: unknown[]): void {
        for (const a of args) {
            if (typeof a === "number" && !Number.isFinite(a)) {
                throw new Error(`${name} got non-finite argument`);
            }
        }
        this.calls.push(name);
    }

    clearRect(x: number, y: number, w: number, h: number): void { this.log("clearRect", x, y, w, h); }
    fillRect(x: number, y: number, w: number, h: number): void { this.log("fillRect", x, y, w, h); }
    beginPath(): void { this.log("beginPath"); }
    arc(x: number, y: number, r: number, a0: number, a1: number): void { this.log("arc", x, y, r, a0, a1); }
    moveTo(x: number, y: number): void { this.log("moveTo", x, y); }
    lineTo(x: number, y: number): void { this.log("lineTo", x, y); }
    stroke(): void { this.log("stroke"); }
    fill(): void { this.log("fill"); }
    fillText(text: string, x: number, y: number): void { this.log("fillText:" + text, x, y); }
}
