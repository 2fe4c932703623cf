/* tslint:disable */
/* eslint-disable */

/**
 * Fair against unfair discrepancy nets; group sizes halve from `2^log_n`.
 */
export function discrepancyDemo(log_n: number, k: number, m: number, eps: number, seed: number): string;

/**
 * FGLP against GLP with `m` balls of a fixed radius.
 */
export function hittingDemo(n: number, red_share: number, m: number, radius: number, seed: number): string;

/**
 * FMC against uniform sampling, with 32 random rectangles.
 */
export function samplingDemo(n: number, k: number, skew: number, eps: number, phi: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly discrepancyDemo: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly hittingDemo: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly samplingDemo: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
