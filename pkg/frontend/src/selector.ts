/** The 10%-step probability selector.
 *
 * Eleven discrete options, exactly one selectable, immutable once the
 * screen is submitted. The model is the only path to a selection value,
 * so the widget cannot emit anything off the grid.
 */

export const GRID_OPTIONS: readonly number[] = Object.freeze([
  0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100,
]);

export class SelectionModel {
  private selectedIndex: number | null = null;
  private submitted = false;

  get options(): readonly number[] {
    return GRID_OPTIONS;
  }

  get selected(): number | null {
    return this.selectedIndex === null ? null : GRID_OPTIONS[this.selectedIndex]!;
  }

  get canSubmit(): boolean {
    return this.selectedIndex !== null && !this.submitted;
  }

  get isSubmitted(): boolean {
    return this.submitted;
  }

  /** Select by option index; anything else is refused. */
  selectIndex(index: number): void {
    if (this.submitted) {
      throw new Error("selection is immutable after submit");
    }
    if (!Number.isInteger(index) || index < 0 || index >= GRID_OPTIONS.length) {
      throw new Error(`option index ${index} out of range`);
    }
    this.selectedIndex = index;
  }

  /** Select by percent value; only grid values exist as options. */
  selectValue(value: number): void {
    const index = GRID_OPTIONS.indexOf(value);
    if (index === -1) {
      throw new Error(`value ${value} is not a grid option`);
    }
    this.selectIndex(index);
  }

  /** Take the value for submission and freeze the screen. */
  submit(): number {
    if (this.selectedIndex === null) {
      throw new Error("nothing selected");
    }
    this.submitted = true;
    return GRID_OPTIONS[this.selectedIndex]!;
  }
}

/** Render the selector as HTML; behavior is attached by the app shell. */
export function renderSelector(model: SelectionModel): string {
  const buttons = model.options
    .map((value, index) => {
      const active = model.selected === value ? " selected" : "";
      const disabled = model.isSubmitted ? " disabled" : "";
      return `<button type="button" class="grid-option${active}" data-index="${index}"${disabled}>${value}%</button>`;
    })
    .join("");
  return `<div class="grid-selector" role="radiogroup">${buttons}</div>`;
}
