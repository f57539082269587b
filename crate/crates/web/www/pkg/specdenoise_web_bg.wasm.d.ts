/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_corruption_free: (a: number, b: number) => void;
export const __wbg_get_corruption_height: (a: number) => number;
export const __wbg_get_corruption_preclamp_ratio: (a: number) => number;
export const __wbg_get_corruption_psnr_db: (a: number) => number;
export const __wbg_get_corruption_width: (a: number) => number;
export const __wbg_get_noisetrace_excess_kurtosis: (a: number) => number;
export const __wbg_get_noisetrace_lag1: (a: number) => number;
export const __wbg_get_noisetrace_mean: (a: number) => number;
export const __wbg_get_noisetrace_skewness: (a: number) => number;
export const __wbg_get_noisetrace_target_excess_kurtosis: (a: number) => number;
export const __wbg_get_noisetrace_variance: (a: number) => number;
export const __wbg_noisetrace_free: (a: number, b: number) => void;
export const __wbg_set_corruption_height: (a: number, b: number) => void;
export const __wbg_set_corruption_preclamp_ratio: (a: number, b: number) => void;
export const __wbg_set_corruption_psnr_db: (a: number, b: number) => void;
export const __wbg_set_corruption_width: (a: number, b: number) => void;
export const __wbg_set_noisetrace_excess_kurtosis: (a: number, b: number) => void;
export const __wbg_set_noisetrace_lag1: (a: number, b: number) => void;
export const __wbg_set_noisetrace_mean: (a: number, b: number) => void;
export const __wbg_set_noisetrace_skewness: (a: number, b: number) => void;
export const __wbg_set_noisetrace_target_excess_kurtosis: (a: number, b: number) => void;
export const __wbg_set_noisetrace_variance: (a: number, b: number) => void;
export const corrupt_spectrogram: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number];
export const corruption_clean_rgba: (a: number) => [number, number];
export const corruption_noisy_rgba: (a: number) => [number, number];
export const distributions: () => [number, number];
export const noise_trace: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number];
export const noisetrace_hist_hi: (a: number) => number;
export const noisetrace_hist_lo: (a: number) => number;
export const noisetrace_histogram: (a: number) => [number, number];
export const noisetrace_values: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
