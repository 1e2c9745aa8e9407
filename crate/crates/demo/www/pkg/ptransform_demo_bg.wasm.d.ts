/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_scatterview_free: (a: number, b: number) => void;
export const densityHeatmap: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const estimateScatter: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint) => [number, number, number];
export const recoverPolygon: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
export const scatterview_estimates: (a: number) => [number, number];
export const scatterview_members: (a: number) => [number, number];
export const scatterview_p_hat: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
