// Turn form model: 20 four-way joint selectors plus 2 two-way grip
// selectors.  Kept free of DOM so it is directly testable.

import { validEntries } from "./protocol.js";

export const JOINT_NAMES = [
    "neck", "chest", "lumbar", "abs",
    "r_pec", "l_pec", "r_shoulder", "l_shoulder", "r_elbow", "l_elbow",
    "r_wrist", "l_wrist", "r_glute", "l_glute", "r_hip", "l_hip",
    "r_knee", "l_knee", "r_ankle", "l_ankle",
] as const;

export const JOINT_MODE_LABELS = ["hold", "relax", "extend", "contract"] as const;
export const GRIP_LABELS = ["grip", "release"] as const;

export interface TurnForm {
    entries: (number | null)[];   // 22 selector values
    submitted: boolean;           // locked until the next state arrives
}

export function newForm(): TurnForm {
    // selectors start on hold/release: a valid no-op turn
    return { entries: [...Array(20).fill(1), 2, 2], submitted: false };
}

export function setEntry(form: TurnForm, index: number, value: number): void {
    const hi = index < 20 ? 4 : 2;
    if (index < 0 || index >= 22 || value < 1 || value > hi) {
        throw new RangeError(`selector ${index} cannot take ${value}`);
    }
    form.entries[index] = value;
}

export function clearEntry(form: TurnForm, index: number): void {
    form.entries[index] = null;
}

export function isComplete(form: TurnForm): boolean {
    return validEntries(form.entries);
}

export function canSubmit(form: TurnForm, phase: string): boolean {
    return phase === "turn_input" && !form.submitted && isComplete(form);
}
