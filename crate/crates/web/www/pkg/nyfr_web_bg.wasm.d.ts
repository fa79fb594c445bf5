/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_foldview_free: (a: number, b: number) => void;
export const __wbg_spectrumview_free: (a: number, b: number) => void;
export const flop_table: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const fold_tone: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const foldview_freqs_mhz: (a: number) => [number, number];
export const foldview_nz: (a: number) => number;
export const foldview_power_db: (a: number) => [number, number];
export const foldview_ridge_mhz: (a: number) => [number, number];
export const foldview_times_us: (a: number) => [number, number];
export const reconstruct_scene: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const spectrumview_detections_ghz: (a: number) => [number, number];
export const spectrumview_eligible: (a: number) => number;
export const spectrumview_freqs_ghz: (a: number) => [number, number];
export const spectrumview_power_db: (a: number) => [number, number];
export const spectrumview_truth_ghz: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
