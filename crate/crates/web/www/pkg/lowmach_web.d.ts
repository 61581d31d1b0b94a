/* tslint:disable */
/* eslint-disable */

/**
 * Gresho vortex on `n×n` cells, stepped implicitly with the advective step.
 */
export class Gresho {
    free(): void;
    [Symbol.dispose](): void;
    kineticEnergyRatio(): number;
    machMap(): Float64Array;
    constructor(scheme_name: string, mach: number, n: number);
    pressureFluctuation(): number;
    size(): number;
    step(steps: number): void;
    time(): number;
}

export function shockTube(scheme_name: string, entropy_fix: boolean, n: number): Float64Array;

export function stabilityCurve(scheme_name: string, mach: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_gresho_free: (a: number, b: number) => void;
    readonly gresho_kineticEnergyRatio: (a: number) => number;
    readonly gresho_machMap: (a: number) => [number, number];
    readonly gresho_new: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly gresho_pressureFluctuation: (a: number) => number;
    readonly gresho_size: (a: number) => number;
    readonly gresho_step: (a: number, b: number) => [number, number];
    readonly gresho_time: (a: number) => number;
    readonly shockTube: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly stabilityCurve: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
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
