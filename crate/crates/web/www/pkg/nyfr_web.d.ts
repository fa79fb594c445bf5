/* tslint:disable */
/* eslint-disable */

export class FoldView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly freqs_mhz: Float64Array;
    /**
     * Nyquist zone of the tone.
     */
    readonly nz: number;
    /**
     * Row-major `[frame][bin]`.
     */
    readonly power_db: Float64Array;
    /**
     * Strongest frequency of each frame.
     */
    readonly ridge_mhz: Float64Array;
    readonly times_us: Float64Array;
}

export class SpectrumView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Detections, strongest first.
     */
    readonly detections_ghz: Float64Array;
    /**
     * Every emitter found and no stronger spurious peak.
     */
    readonly eligible: boolean;
    readonly freqs_ghz: Float64Array;
    readonly power_db: Float64Array;
    readonly truth_ghz: Float64Array;
}

/**
 * Flop totals as CSV rows with a header line.
 */
export function flop_table(n: number, m: number, l_snapshots: number, sparsity_k: number): string;

/**
 * Spectrogram of the ADC output for a single noiseless tone. The alias
 * line swings by `nz · A · f_mod` around the folded frequency.
 */
export function fold_tone(carrier_hz: number, mod_amplitude: number, mod_freq_hz: number, window: number, hop: number): FoldView;

/**
 * MP at 1.3 GHz, BPSK at 7.8 GHz and LFM at 14.5 GHz on the 4 GHz-ADC
 * receiver, reconstructed by the fast pipeline. `mod_amplitude = 0` gives
 * an unmodulated LO. The spectrum is max-pooled to `points` values.
 */
export function reconstruct_scene(snr_db: number, mod_amplitude: number, mod_freq_hz: number, seed: number, points: number): SpectrumView;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_foldview_free: (a: number, b: number) => void;
    readonly __wbg_spectrumview_free: (a: number, b: number) => void;
    readonly flop_table: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly fold_tone: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly foldview_freqs_mhz: (a: number) => [number, number];
    readonly foldview_nz: (a: number) => number;
    readonly foldview_power_db: (a: number) => [number, number];
    readonly foldview_ridge_mhz: (a: number) => [number, number];
    readonly foldview_times_us: (a: number) => [number, number];
    readonly reconstruct_scene: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly spectrumview_detections_ghz: (a: number) => [number, number];
    readonly spectrumview_eligible: (a: number) => number;
    readonly spectrumview_freqs_ghz: (a: number) => [number, number];
    readonly spectrumview_power_db: (a: number) => [number, number];
    readonly spectrumview_truth_ghz: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
