/* @ts-self-types="./specdenoise_web.d.ts" */

/**
 * A clean spectrogram and its corrupted copy as RGBA bytes.
 */
export class Corruption {
    static __wrap(ptr) {
        const obj = Object.create(Corruption.prototype);
        obj.__wbg_ptr = ptr;
        CorruptionFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        CorruptionFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_corruption_free(ptr, 0);
    }
    /**
     * @returns {Uint8Array}
     */
    get clean_rgba() {
        const ret = wasm.corruption_clean_rgba(this.__wbg_ptr);
        var v1 = getArrayU8FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 1, 1);
        return v1;
    }
    /**
     * @returns {Uint8Array}
     */
    get noisy_rgba() {
        const ret = wasm.corruption_noisy_rgba(this.__wbg_ptr);
        var v1 = getArrayU8FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 1, 1);
        return v1;
    }
    /**
     * @returns {number}
     */
    get height() {
        const ret = wasm.__wbg_get_corruption_height(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {number}
     */
    get preclamp_ratio() {
        const ret = wasm.__wbg_get_corruption_preclamp_ratio(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get psnr_db() {
        const ret = wasm.__wbg_get_corruption_psnr_db(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get width() {
        const ret = wasm.__wbg_get_corruption_width(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @param {number} arg0
     */
    set height(arg0) {
        wasm.__wbg_set_corruption_height(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set preclamp_ratio(arg0) {
        wasm.__wbg_set_corruption_preclamp_ratio(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set psnr_db(arg0) {
        wasm.__wbg_set_corruption_psnr_db(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set width(arg0) {
        wasm.__wbg_set_corruption_width(this.__wbg_ptr, arg0);
    }
}
if (Symbol.dispose) Corruption.prototype[Symbol.dispose] = Corruption.prototype.free;

/**
 * A sampled noise sequence with its summary statistics.
 */
export class NoiseTrace {
    static __wrap(ptr) {
        const obj = Object.create(NoiseTrace.prototype);
        obj.__wbg_ptr = ptr;
        NoiseTraceFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        NoiseTraceFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_noisetrace_free(ptr, 0);
    }
    /**
     * @returns {number}
     */
    get excess_kurtosis() {
        const ret = wasm.__wbg_get_noisetrace_excess_kurtosis(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get lag1() {
        const ret = wasm.__wbg_get_noisetrace_lag1(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get mean() {
        const ret = wasm.__wbg_get_noisetrace_mean(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get skewness() {
        const ret = wasm.__wbg_get_noisetrace_skewness(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get target_excess_kurtosis() {
        const ret = wasm.__wbg_get_noisetrace_target_excess_kurtosis(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get variance() {
        const ret = wasm.__wbg_get_noisetrace_variance(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get hist_hi() {
        const ret = wasm.noisetrace_hist_hi(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get hist_lo() {
        const ret = wasm.noisetrace_hist_lo(this.__wbg_ptr);
        return ret;
    }
    /**
     * Equal-width bin counts over `[hist_lo, hist_hi]`.
     * @returns {Uint32Array}
     */
    get histogram() {
        const ret = wasm.noisetrace_histogram(this.__wbg_ptr);
        var v1 = getArrayU32FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 4, 4);
        return v1;
    }
    /**
     * @returns {Float64Array}
     */
    get values() {
        const ret = wasm.noisetrace_values(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @param {number} arg0
     */
    set excess_kurtosis(arg0) {
        wasm.__wbg_set_noisetrace_excess_kurtosis(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set lag1(arg0) {
        wasm.__wbg_set_noisetrace_lag1(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set mean(arg0) {
        wasm.__wbg_set_noisetrace_mean(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set skewness(arg0) {
        wasm.__wbg_set_noisetrace_skewness(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set target_excess_kurtosis(arg0) {
        wasm.__wbg_set_noisetrace_target_excess_kurtosis(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set variance(arg0) {
        wasm.__wbg_set_noisetrace_variance(this.__wbg_ptr, arg0);
    }
}
if (Symbol.dispose) NoiseTrace.prototype[Symbol.dispose] = NoiseTrace.prototype.free;

/**
 * @param {string} dist
 * @param {number} nf
 * @param {number} a
 * @param {bigint} seed
 * @param {number} size
 * @returns {Corruption}
 */
export function corrupt_spectrogram(dist, nf, a, seed, size) {
    const ptr0 = passStringToWasm0(dist, wasm.__wbindgen_malloc, wasm.__wbindgen_realloc);
    const len0 = WASM_VECTOR_LEN;
    const ret = wasm.corrupt_spectrogram(ptr0, len0, nf, a, seed, size);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return Corruption.__wrap(ret[0]);
}

/**
 * Distribution names accepted by the other functions, comma separated.
 * @returns {string}
 */
export function distributions() {
    let deferred1_0;
    let deferred1_1;
    try {
        const ret = wasm.distributions();
        deferred1_0 = ret[0];
        deferred1_1 = ret[1];
        return getStringFromWasm0(ret[0], ret[1]);
    } finally {
        wasm.__wbindgen_free(deferred1_0, deferred1_1, 1);
    }
}

/**
 * @param {string} dist
 * @param {number} n
 * @param {number} a
 * @param {bigint} seed
 * @param {number} bins
 * @returns {NoiseTrace}
 */
export function noise_trace(dist, n, a, seed, bins) {
    const ptr0 = passStringToWasm0(dist, wasm.__wbindgen_malloc, wasm.__wbindgen_realloc);
    const len0 = WASM_VECTOR_LEN;
    const ret = wasm.noise_trace(ptr0, len0, n, a, seed, bins);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return NoiseTrace.__wrap(ret[0]);
}
function __wbg_get_imports() {
    const import0 = {
        __proto__: null,
        __wbg_Error_30c8987f7c2ed4e2: function(arg0, arg1) {
            const ret = Error(getStringFromWasm0(arg0, arg1));
            return ret;
        },
        __wbg___wbindgen_throw_41e9ee4f547fc59a: function(arg0, arg1) {
            throw new Error(getStringFromWasm0(arg0, arg1));
        },
        __wbindgen_init_externref_table: function() {
            const table = wasm.__wbindgen_externrefs;
            const offset = table.grow(4);
            table.set(0, undefined);
            table.set(offset + 0, undefined);
            table.set(offset + 1, null);
            table.set(offset + 2, true);
            table.set(offset + 3, false);
        },
    };
    return {
        __proto__: null,
        "./specdenoise_web_bg.js": import0,
    };
}

const CorruptionFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_corruption_free(ptr, 1));
const NoiseTraceFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_noisetrace_free(ptr, 1));

function getArrayF64FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getFloat64ArrayMemory0().subarray(ptr / 8, ptr / 8 + len);
}

function getArrayU32FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getUint32ArrayMemory0().subarray(ptr / 4, ptr / 4 + len);
}

function getArrayU8FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getUint8ArrayMemory0().subarray(ptr / 1, ptr / 1 + len);
}

let cachedFloat64ArrayMemory0 = null;
function getFloat64ArrayMemory0() {
    if (cachedFloat64ArrayMemory0 === null || cachedFloat64ArrayMemory0.byteLength === 0) {
        cachedFloat64ArrayMemory0 = new Float64Array(wasm.memory.buffer);
    }
    return cachedFloat64ArrayMemory0;
}

function getStringFromWasm0(ptr, len) {
    return decodeText(ptr >>> 0, len);
}

let cachedUint32ArrayMemory0 = null;
function getUint32ArrayMemory0() {
    if (cachedUint32ArrayMemory0 === null || cachedUint32ArrayMemory0.byteLength === 0) {
        cachedUint32ArrayMemory0 = new Uint32Array(wasm.memory.buffer);
    }
    return cachedUint32ArrayMemory0;
}

let cachedUint8ArrayMemory0 = null;
function getUint8ArrayMemory0() {
    if (cachedUint8ArrayMemory0 === null || cachedUint8ArrayMemory0.byteLength === 0) {
        cachedUint8ArrayMemory0 = new Uint8Array(wasm.memory.buffer);
    }
    return cachedUint8ArrayMemory0;
}

function passStringToWasm0(arg, malloc, realloc) {
    if (realloc === undefined) {
        const buf = cachedTextEncoder.encode(arg);
        const ptr = malloc(buf.length, 1) >>> 0;
        getUint8ArrayMemory0().subarray(ptr, ptr + buf.length).set(buf);
        WASM_VECTOR_LEN = buf.length;
        return ptr;
    }

    let len = arg.length;
    let ptr = malloc(len, 1) >>> 0;

    const mem = getUint8ArrayMemory0();

    let offset = 0;

    for (; offset < len; offset++) {
        const code = arg.charCodeAt(offset);
        if (code > 0x7F) break;
        mem[ptr + offset] = code;
    }
    if (offset !== len) {
        if (offset !== 0) {
            arg = arg.slice(offset);
        }
        ptr = realloc(ptr, len, len = offset + arg.length * 3, 1) >>> 0;
        const view = getUint8ArrayMemory0().subarray(ptr + offset, ptr + len);
        const ret = cachedTextEncoder.encodeInto(arg, view);

        offset += ret.written;
        ptr = realloc(ptr, len, offset, 1) >>> 0;
    }

    WASM_VECTOR_LEN = offset;
    return ptr;
}

function takeFromExternrefTable0(idx) {
    const value = wasm.__wbindgen_externrefs.get(idx);
    wasm.__externref_table_dealloc(idx);
    return value;
}

let cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
cachedTextDecoder.decode();
const MAX_SAFARI_DECODE_BYTES = 2146435072;
let numBytesDecoded = 0;
function decodeText(ptr, len) {
    numBytesDecoded += len;
    if (numBytesDecoded >= MAX_SAFARI_DECODE_BYTES) {
        cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
        cachedTextDecoder.decode();
        numBytesDecoded = len;
    }
    return cachedTextDecoder.decode(getUint8ArrayMemory0().subarray(ptr, ptr + len));
}

const cachedTextEncoder = new TextEncoder();

if (!('encodeInto' in cachedTextEncoder)) {
    cachedTextEncoder.encodeInto = function (arg, view) {
        const buf = cachedTextEncoder.encode(arg);
        view.set(buf);
        return {
            read: arg.length,
            written: buf.length
        };
    };
}

let WASM_VECTOR_LEN = 0;

let wasmModule, wasmInstance, wasm;
function __wbg_finalize_init(instance, module) {
    wasmInstance = instance;
    wasm = instance.exports;
    wasmModule = module;
    cachedFloat64ArrayMemory0 = null;
    cachedUint32ArrayMemory0 = null;
    cachedUint8ArrayMemory0 = null;
    wasm.__wbindgen_start();
    return wasm;
}

async function __wbg_load(module, imports) {
    if (typeof Response === 'function' && module instanceof Response) {
        if (!module.ok) {
            throw new Error(`failed to fetch Wasm: ${module.status} ${module.statusText} fetching '${module.url}'`);
        }

        if (typeof WebAssembly.instantiateStreaming === 'function') {
            try {
                return await WebAssembly.instantiateStreaming(module, imports);
            } catch (e) {
                const validResponse = expectedResponseType(module.type);

                if (validResponse && module.headers.get('Content-Type') !== 'application/wasm') {
                    console.warn("`WebAssembly.instantiateStreaming` failed because your server does not serve Wasm with `application/wasm` MIME type. Falling back to `WebAssembly.instantiate` which is slower. Original error:\n", e);

                } else { throw e; }
            }
        }

        const bytes = await module.arrayBuffer();
        return await WebAssembly.instantiate(bytes, imports);
    } else {
        const instance = await WebAssembly.instantiate(module, imports);

        if (instance instanceof WebAssembly.Instance) {
            return { instance, module };
        } else {
            return instance;
        }
    }

    function expectedResponseType(type) {
        switch (type) {
            case 'basic': case 'cors': case 'default': return true;
        }
        return false;
    }
}

function initSync(module) {
    if (wasm !== undefined) return wasm;


    if (module !== undefined) {
        if (Object.getPrototypeOf(module) === Object.prototype) {
            ({module} = module)
        } else {
            console.warn('using deprecated parameters for `initSync()`; pass a single object instead')
        }
    }

    const imports = __wbg_get_imports();
    if (!(module instanceof WebAssembly.Module)) {
        module = new WebAssembly.Module(module);
    }
    const instance = new WebAssembly.Instance(module, imports);
    return __wbg_finalize_init(instance, module);
}

async function __wbg_init(module_or_path) {
    if (wasm !== undefined) return wasm;


    if (module_or_path !== undefined) {
        if (Object.getPrototypeOf(module_or_path) === Object.prototype) {
            ({module_or_path} = module_or_path)
        } else {
            console.warn('using deprecated parameters for the initialization function; pass a single object instead')
        }
    }

    if (module_or_path === undefined) {
        module_or_path = new URL('specdenoise_web_bg.wasm', import.meta.url);
    }
    const imports = __wbg_get_imports();

    if (typeof module_or_path === 'string' || (typeof Request === 'function' && module_or_path instanceof Request) || (typeof URL === 'function' && module_or_path instanceof URL)) {
        module_or_path = fetch(module_or_path);
    }

    const { instance, module } = await __wbg_load(await module_or_path, imports);

    return __wbg_finalize_init(instance, module);
}

export { initSync, __wbg_init as default };
