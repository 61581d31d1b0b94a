/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_gresho_free: (a: number, b: number) => void;
export const gresho_kineticEnergyRatio: (a: number) => number;
export const gresho_machMap: (a: number) => [number, number];
export const gresho_new: (a: number, b: number, c: number, d: number) => [number, number, number];
export const gresho_pressureFluctuation: (a: number) => number;
export const gresho_size: (a: number) => number;
export const gresho_step: (a: number, b: number) => [number, number];
export const gresho_time: (a: number) => number;
export const shockTube: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const stabilityCurve: (a: number, b: number, c: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
