// Browser bootstrap: connect through the gateway, build the 22-selector
// turn form, render states, submit turns.
//
// Query parameters: ?server=ws://127.0.0.1:4748  &preset=aikido-dojo-v1
//                   &side=0|1  &opponent=random|immobile  &seed=0

import {
    GRIP_LABELS,
    JOINT_MODE_LABELS,
    JOINT_NAMES,
    TurnForm,
    canSubmit,
    newForm,
    setEntry,
} from "./form.js";
import {
    DEFAULT_SCENE,
    RenderError,
    SceneOptions,
    renderErrorBanner,
    renderState,
} from "./render.js";
import { MatchSession, PRESETS } from "./session.js";
import { WebSocketTransport } from "./transport.js";

function param(name: string, fallback: string): string {
    return new URLSearchParams(window.location.search).get(name) ?? fallback;
}

function main(): void {
    const presetId = param("preset", "aikido-dojo-v1");
    const side = (param("side", "0") === "1" ? 1 : 0) as 0 | 1;
    const opponent = param("opponent", "random") === "immobile" ? "immobile" : "random";
    const seed = Number(param("seed", "0"));
    const server = param("server", `ws://${window.location.hostname || "127.0.0.1"}:4748`);
    const preset = PRESETS[presetId] ?? PRESETS["aikido-dojo-v1"];

    const canvas = document.getElementById("scene") as HTMLCanvasElement;
    const ctx = canvas.getContext("2d")!;
    const status = document.getElementById("status")!;
    const formDiv = document.getElementById("form")!;
    const submitBtn = document.getElementById("submit") as HTMLButtonElement;
    const rematchBtn = document.getElementById("rematch") as HTMLButtonElement;

    const scene: SceneOptions = {
        ...DEFAULT_SCENE,
        width: canvas.width,
        height: canvas.height,
        dojoRadius: Number(preset.settings.dojo_radius),
        matchframes: Number(preset.settings.matchframes),
    };

    const form: TurnForm = newForm();
    const selects: HTMLSelectElement[] = [];
    for (let i = 0; i < 22; i++) {
        const label = document.createElement("label");
        label.textContent = i < 20 ? JOINT_NAMES[i] : (i === 20 ? "r_grip" : "l_grip");
        const sel = document.createElement("select");
        const labels = i < 20 ? JOINT_MODE_LABELS : GRIP_LABELS;
        labels.forEach((text, k) => {
            const opt = document.createElement("option");
            opt.value = String(k + 1);
            opt.textContent = text;
            sel.appendChild(opt);
        });
        sel.value = String(form.entries[i]);
        sel.onchange = () => {
            setEntry(form, i, Number(sel.value));
            refresh();
        };
        label.appendChild(sel);
        formDiv.appendChild(label);
        selects.push(sel);
    }

    const transport = new WebSocketTransport(server);
    const session = new MatchSession(transport, { preset: preset.id, side, opponent, seed });

    function refresh(): void {
        submitBtn.disabled = !canSubmit(form, session.phase);
        rematchBtn.disabled = session.phase !== "terminal";
        status.textContent = `phase: ${session.phase}` +
            (session.lastError ? `  last error: ${session.lastError.code}` : "");
    }

    session.onState((state) => {
        form.submitted = false;
        try {
            renderState(ctx, state, scene);
        } catch (err) {
            if (err instanceof RenderError) {
                renderErrorBanner(ctx, err.message, scene);
            } else {
                throw err;
            }
        }
        refresh();
    });
    session.onPhase(refresh);
    session.onError((e) => {
        renderErrorBanner(ctx, `${e.code}: ${e.text}`, scene);
        refresh();
    });

    submitBtn.onclick = () => {
        if (!canSubmit(form, session.phase)) {
            return;
        }
        form.submitted = true;
        session.submitTurn(form.entries as number[]);
        refresh();
    };
    rematchBtn.onclick = () => {
        session.rematch(seed + 1);
        refresh();
    };

    transport.onOpen(() => session.start());
    transport.onClose(() => {
        status.textContent = "disconnected";
    });
    refresh();
}

window.addEventListener("DOMContentLoaded", main);
