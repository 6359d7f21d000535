/* tslint:disable */
/* eslint-disable */

export function outline(name: string): Float64Array;

export function paramInfo(): string;

export function searchPath(amp_x: number, amp_y: number, n1_over_t: number, n2_over_t: number, duration: number, samples: number): Float64Array;

export function shapeDistance(a: string, b: string): number;

/**
 * Returns the trace as JSON.
 */
export function simulate(task_name: string, params: Float64Array, seed: number): string;

export function taskNames(): string;

export function turningSteps(name: string): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly outline: (a: number, b: number) => [number, number, number, number];
    readonly paramInfo: () => [number, number];
    readonly searchPath: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly shapeDistance: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly simulate: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly taskNames: () => [number, number];
    readonly turningSteps: (a: number, b: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
