/* tslint:disable */
/* eslint-disable */

/**
 * A clean spectrogram and its corrupted copy as RGBA bytes.
 */
export class Corruption {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly clean_rgba: Uint8Array;
    readonly noisy_rgba: Uint8Array;
    height: number;
    preclamp_ratio: number;
    psnr_db: number;
    width: number;
}

/**
 * A sampled noise sequence with its summary statistics.
 */
export class NoiseTrace {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    excess_kurtosis: number;
    lag1: number;
    mean: number;
    skewness: number;
    target_excess_kurtosis: number;
    variance: number;
    readonly hist_hi: number;
    readonly hist_lo: number;
    /**
     * Equal-width bin counts over `[hist_lo, hist_hi]`.
     */
    readonly histogram: Uint32Array;
    readonly values: Float64Array;
}

export function corrupt_spectrogram(dist: string, nf: number, a: number, seed: bigint, size: number): Corruption;

/**
 * Distribution names accepted by the other functions, comma separated.
 */
export function distributions(): string;

export function noise_trace(dist: string, n: number, a: number, seed: bigint, bins: number): NoiseTrace;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_corruption_free: (a: number, b: number) => void;
    readonly __wbg_get_corruption_height: (a: number) => number;
    readonly __wbg_get_corruption_preclamp_ratio: (a: number) => number;
    readonly __wbg_get_corruption_psnr_db: (a: number) => number;
    readonly __wbg_get_corruption_width: (a: number) => number;
    readonly __wbg_get_noisetrace_excess_kurtosis: (a: number) => number;
    readonly __wbg_get_noisetrace_lag1: (a: number) => number;
    readonly __wbg_get_noisetrace_mean: (a: number) => number;
    readonly __wbg_get_noisetrace_skewness: (a: number) => number;
    readonly __wbg_get_noisetrace_target_excess_kurtosis: (a: number) => number;
    readonly __wbg_get_noisetrace_variance: (a: number) => number;
    readonly __wbg_noisetrace_free: (a: number, b: number) => void;
    readonly __wbg_set_corruption_height: (a: number, b: number) => void;
    readonly __wbg_set_corruption_preclamp_ratio: (a: number, b: number) => void;
    readonly __wbg_set_corruption_psnr_db: (a: number, b: number) => void;
    readonly __wbg_set_corruption_width: (a: number, b: number) => void;
    readonly __wbg_set_noisetrace_excess_kurtosis: (a: number, b: number) => void;
    readonly __wbg_set_noisetrace_lag1: (a: number, b: number) => void;
    readonly __wbg_set_noisetrace_mean: (a: number, b: number) => void;
    readonly __wbg_set_noisetrace_skewness: (a: number, b: number) => void;
    readonly __wbg_set_noisetrace_target_excess_kurtosis: (a: number, b: number) => void;
    readonly __wbg_set_noisetrace_variance: (a: number, b: number) => void;
    readonly corrupt_spectrogram: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number];
    readonly corruption_clean_rgba: (a: number) => [number, number];
    readonly corruption_noisy_rgba: (a: number) => [number, number];
    readonly distributions: () => [number, number];
    readonly noise_trace: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number];
    readonly noisetrace_hist_hi: (a: number) => number;
    readonly noisetrace_hist_lo: (a: number) => number;
    readonly noisetrace_histogram: (a: number) => [number, number];
    readonly noisetrace_values: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
