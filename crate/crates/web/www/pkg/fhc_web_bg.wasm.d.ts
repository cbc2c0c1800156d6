/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_prbroundtrip_free: (a: number, b: number) => void;
export const gaussianPrb: (a: number, b: number) => [number, number];
export const mulawCurve: (a: number, b: number, c: number) => [number, number, number, number];
export const prbroundtrip_reconstructed: (a: number) => [number, number];
export const prbroundtrip_section: (a: number) => [number, number];
export const prbroundtrip_side_info: (a: number) => [number, number];
export const prbroundtrip_sqnr_db: (a: number) => number;
export const roundTrip: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const sqnrCurve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
