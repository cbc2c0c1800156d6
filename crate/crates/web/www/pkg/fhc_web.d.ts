/* tslint:disable */
/* eslint-disable */

/**
 * One PRB through a codec and onto the wire.
 */
export class PrbRoundTrip {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Interleaved re, im of the decompressed block.
     */
    readonly reconstructed: Float64Array;
    /**
     * The packed section, header included.
     */
    readonly section: Uint8Array;
    readonly side_info: string;
    readonly sqnr_db: number;
}

export function gaussianPrb(seed: number, power_dbfs: number): Float64Array;

export function mulawCurve(mu: number, bits: number, points: number): Float64Array;

export function roundTrip(interleaved: Float64Array, method: string, bits: number): PrbRoundTrip;

export function sqnrCurve(method: string, min_bits: number, max_bits: number, blocks: number, power_dbfs: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_prbroundtrip_free: (a: number, b: number) => void;
    readonly gaussianPrb: (a: number, b: number) => [number, number];
    readonly mulawCurve: (a: number, b: number, c: number) => [number, number, number, number];
    readonly prbroundtrip_reconstructed: (a: number) => [number, number];
    readonly prbroundtrip_section: (a: number) => [number, number];
    readonly prbroundtrip_side_info: (a: number) => [number, number];
    readonly prbroundtrip_sqnr_db: (a: number) => number;
    readonly roundTrip: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly sqnrCurve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
