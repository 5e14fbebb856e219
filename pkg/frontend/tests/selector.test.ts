import { describe, expect, it } from "vitest";

import { GRID_OPTIONS, SelectionModel, renderSelector } from "../src/selector.js";

describe("SelectionModel", () => {
  it("exposes exactly the eleven grid options", () => {
    expect([...GRID_OPTIONS]).toEqual([0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100]);
  });

  it("cannot emit a non-grid value", () => {
    const model = new SelectionModel();
    for (const bad of [5, 35, 101, -10, 12.5, NaN]) {
      expect(() => model.selectValue(bad)).toThrow();
    }
    expect(model.selected).toBeNull();
  });

  it("rejects out-of-range indices", () => {
    const model = new SelectionModel();
    for (const bad of [-1, 11, 1.5, NaN]) {
      expect(() => model.selectIndex(bad)).toThrow();
    }
  });

  it("holds exactly one selection at a time", () => {
    const model = new SelectionModel();
    model.selectValue(30);
    model.selectValue(70);
    expect(model.selected).toBe(70);
  });

  it("cannot submit without a selection", () => {
    const model = new SelectionModel();
    expect(model.canSubmit).toBe(false);
    expect(() => model.submit()).toThrow();
  });

  it("submit returns the grid value and freezes the screen", () => {
    const model = new SelectionModel();
    model.selectValue(40);
    expect(model.submit()).toBe(40);
    expect(model.isSubmitted).toBe(true);
    expect(() => model.selectValue(50)).toThrow(/immutable/);
    expect(model.selected).toBe(40);
  });

  it("every submittable value lies on the grid", () => {
    for (let index = 0; index < GRID_OPTIONS.length; index++) {
      const model = new SelectionModel();
      model.selectIndex(index);
      const value = model.submit();
      expect(value % 10).toBe(0);
      expect(value).toBeGreaterThanOrEqual(0);
      expect(value).toBeLessThanOrEqual(100);
    }
  });
});

describe("renderSelector", () => {
  it("renders one button per option, disabled after submit", () => {
    const model = new SelectionModel();
    const html = renderSelector(model);
    expect(html.match(/grid-option/g)).toHaveLength(11);
    expect(html).not.toContain("disabled");

    model.selectValue(50);
    model.submit();
    const frozen = renderSelector(model);
    expect(frozen.match(/disabled/g)).toHaveLength(11);
    expect(frozen).toContain("selected");
  });
});
