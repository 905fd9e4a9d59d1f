/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const demo_clocks: (a: number, b: number) => [number, number, number, number];
export const demo_keys: () => [number, number];
export const demo_metrics: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const demo_new: () => number;
export const demo_set: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const demo_spectrum: (a: number, b: number, c: number) => [number, number, number, number];
export const demo_sweep: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
