/* tslint:disable */
/* eslint-disable */

/**
 * Circulator design edited from the page.
 */
export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Six clock waveforms over one modulation period, `samples` values
     * (0 or 1) each, clock after clock.
     */
    clocks(samples: number): Float64Array;
    /**
     * Names accepted by [`Demo::set`].
     */
    static keys(): string[];
    /**
     * `[f_center_hz, ix_db, il_db, rl_db, bw_fraction]` of a sweep; the
     * bandwidth is zero when isolation never reaches `threshold_db`.
     */
    metrics(f_start: number, f_stop: number, points: number, order: number, threshold_db: number): Float64Array;
    constructor();
    /**
     * Changes one design parameter, e.g. `("q0", "40")` or
     * `("duty_error_pct", "0.7")`.
     */
    set(key: string, value: string): void;
    /**
     * Records `[port, harmonic, f_hz, level_dbc]` for a unit drive at TX.
     */
    spectrum(f_tx: number, order: number): Float64Array;
    /**
     * Records `[f_hz, ix_db, il_db, rl_db]` per frequency.
     */
    sweep(f_start: number, f_stop: number, points: number, order: number): Float64Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_clocks: (a: number, b: number) => [number, number, number, number];
    readonly demo_keys: () => [number, number];
    readonly demo_metrics: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly demo_new: () => number;
    readonly demo_set: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly demo_spectrum: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demo_sweep: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_drop_slice: (a: number, b: number) => void;
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
