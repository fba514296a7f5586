import { describe, expect, it } from "vitest";

import {
  capsFor,
  emptyComposer,
  setKind,
  toRequestBody,
  validate,
} from "../src/composer.js";

const TARGETS = ["dialogue", "script"];

describe("composer capabilities", () => {
  it("YesNo disables note and amendments", () => {
    expect(capsFor("YesNo")).toEqual(
      { noteEnabled: false, noteRequired: false, amendmentsEnabled: false });
  });

  it("Critical requires a note but forbids amendments", () => {
    expect(capsFor("Critical")).toEqual(
      { noteEnabled: true, noteRequired: true, amendmentsEnabled: false });
  });

  it("Detailed enables the amendments editor", () => {
    expect(capsFor("Detailed")).toEqual(
      { noteEnabled: true, noteRequired: true, amendmentsEnabled: true });
  });

  it("switching kind drops fields the new kind cannot carry", () => {
    let state = emptyComposer();
    state = setKind(state, "Detailed");
    state = { ...state, note: "sharper", amendments: [{ key: "tone", value: "up" }] };
    state = setKind(state, "YesNo");
    expect(state.note).toBe("");
    expect(state.amendments).toEqual([]);
  });
});

describe("composer validation", () => {
  it("never emits a YesNo with a note", () => {
    const state = { ...emptyComposer(), target: "script", note: "sneaky" };
    expect(validate(state, TARGETS)).not.toEqual([]);
    expect(() => toRequestBody(state, TARGETS)).toThrow(/no note/);
  });

  it("requires a note for Critical and Detailed", () => {
    for (const kind of ["Critical", "Detailed"] as const) {
      const state = setKind({ ...emptyComposer(), target: "script" }, kind);
      expect(validate(state, TARGETS).join(" ")).toMatch(/needs a note/);
    }
  });

  it("rejects targets that are not running or done", () => {
    const state = { ...emptyComposer(), target: "post" };
    expect(validate(state, TARGETS).join(" ")).toMatch(/not a running or done/);
  });

  it("builds a valid Detailed rejection with amendments", () => {
    let state = setKind({ ...emptyComposer(), target: "dialogue" }, "Detailed");
    state = {
      ...state,
      verdict: "reject",
      note: "tighten the fifth act",
      amendments: [{ key: "tone", value: "urgent" }, { key: " ", value: "drop" }],
    };
    expect(toRequestBody(state, TARGETS)).toEqual({
      target: "dialogue",
      kind: "Detailed",
      verdict: "reject",
      note: "tighten the fifth act",
      amendments: { tone: "urgent" },
    });
  });

  it("builds a bare YesNo approval", () => {
    const state = { ...emptyComposer(), target: "script" };
    expect(toRequestBody(state, TARGETS)).toEqual({
      target: "script",
      kind: "YesNo",
      verdict: "approve",
      note: "",
      amendments: {},
    });
  });
});
