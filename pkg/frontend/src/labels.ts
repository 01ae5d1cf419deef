/** Label alphabet shared with the inference service. */

export const BACKGROUND = 0;
export const VENTRICLE = 1;
export const MYOCARDIUM = 2;
export const ATRIUM = 3;

export type Label = 0 | 1 | 2 | 3;
export type BrushLabel = 1 | 2 | 3;

export const LABEL_NAMES: Record<Label, string> = {
  0: "erase",
  1: "left ventricle",
  2: "myocardium",
  3: "left atrium",
};

/** Overlay palette: background transparent, structures distinct. */
export const LABEL_COLORS: Record<Label, [number, number, number, number]> = {
  0: [0, 0, 0, 0],
  1: [66, 135, 245, 200],
  2: [235, 110, 75, 200],
  3: [90, 200, 120, 200],
};

export function isLabel(value: number): value is Label {
  return value === 0 || value === 1 || value === 2 || value === 3;
}
