/* tslint:disable */
/* eslint-disable */

/**
 * Replication nodes and the selected estimate for a noisy series.
 */
export class ScatterView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * `[c_re, c_im, xi_re, xi_im, ..]` of the selected terms.
     */
    readonly estimates: Float64Array;
    /**
     * `[re, im, selected, ..]` for every clustered replication node.
     */
    readonly members: Float64Array;
    readonly p_hat: number;
}

export function densityHeatmap(model_flat: Float64Array, n: number, sigma: number, half: number, points: number): Float64Array;

export function estimateScatter(model_flat: Float64Array, n: number, sigma: number, replications: number, p_tilde: number, seed: bigint): ScatterView;

export function recoverPolygon(vertices_flat: Float64Array, count: number, sigma: number, replications: number, seed: bigint): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_scatterview_free: (a: number, b: number) => void;
    readonly densityHeatmap: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly estimateScatter: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint) => [number, number, number];
    readonly recoverPolygon: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
    readonly scatterview_estimates: (a: number) => [number, number];
    readonly scatterview_members: (a: number) => [number, number];
    readonly scatterview_p_hat: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
