/**
 * Minimal FFT: iterative radix-2 for power-of-two sizes, Bluestein's
 * chirp-z resampling for everything else. Double precision throughout.
 * Only what the exporter needs is exposed: real-input magnitude spectra.
 */

function isPow2(n: number): boolean {
  return n > 0 && (n & (n - 1)) === 0;
}

function nextPow2(n: number): number {
  let m = 1;
  while (m < n) m <<= 1;
  return m;
}

/** In-place forward FFT, n a power of two. */
function fftPow2(re: Float64Array, im: Float64Array): void {
  const n = re.length;
  // bit-reversal permutation
  for (let i = 1, j = 0; i < n; i++) {
    let bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      const tr = re[i]; re[i] = re[j]; re[j] = tr;
      const ti = im[i]; im[i] = im[j]; im[j] = ti;
    }
  }
  for (let len = 2; len <= n; len <<= 1) {
    const ang = (-2 * Math.PI) / len;
    const wr = Math.cos(ang);
    const wi = Math.sin(ang);
    for (let i = 0; i < n; i += len) {
      let cr = 1;
      let ci = 0;
      for (let j = 0; j < len / 2; j++) {
        const a = i + j;
        const b = a + len / 2;
        const tr = re[b] * cr - im[b] * ci;
        const ti = re[b] * ci + im[b] * cr;
        re[b] = re[a] - tr;
        im[b] = im[a] - ti;
        re[a] += tr;
        im[a] += ti;
        const ncr = cr * wr - ci * wi;
        ci = cr * wi + ci * wr;
        cr = ncr;
      }
    }
  }
}

interface BluesteinPlan {
  n: number;
  m: number;
  cosChirp: Float64Array;
  sinChirp: Float64Array;
  fbRe: Float64Array;
  fbIm: Float64Array;
}

const bluesteinPlans = new Map<number, BluesteinPlan>();

function planBluestein(n: number): BluesteinPlan {
  const cached = bluesteinPlans.get(n);
  if (cached) return cached;
  const m = nextPow2(2 * n - 1);
  // chirp phases via (k*k) mod 2n to avoid large-angle cancellation
  const cosChirp = new Float64Array(n);
  const sinChirp = new Float64Array(n);
  for (let k = 0; k < n; k++) {
    const q = (k * k) % (2 * n);
    const ang = (Math.PI * q) / n;
    cosChirp[k] = Math.cos(ang);
    sinChirp[k] = Math.sin(ang);
  }
  const fbRe = new Float64Array(m);
  const fbIm = new Float64Array(m);
  fbRe[0] = cosChirp[0];
  fbIm[0] = sinChirp[0];
  for (let k = 1; k < n; k++) {
    fbRe[k] = fbRe[m - k] = cosChirp[k];
    fbIm[k] = fbIm[m - k] = sinChirp[k];
  }
  fftPow2(fbRe, fbIm);
  const plan = { n, m, cosChirp, sinChirp, fbRe, fbIm };
  bluesteinPlans.set(n, plan);
  return plan;
}

/** Forward FFT of arbitrary size; returns fresh arrays. */
export function fft(re: Float64Array, im: Float64Array): [Float64Array, Float64Array] {
  const n = re.length;
  if (isPow2(n)) {
    const r = re.slice();
    const i = im.slice();
    fftPow2(r, i);
    return [r, i];
  }
  const { m, cosChirp, sinChirp, fbRe, fbIm } = planBluestein(n);
  const aRe = new Float64Array(m);
  const aIm = new Float64Array(m);
  for (let k = 0; k < n; k++) {
    // a[k] = x[k] * conj(chirp[k])
    aRe[k] = re[k] * cosChirp[k] + im[k] * sinChirp[k];
    aIm[k] = im[k] * cosChirp[k] - re[k] * sinChirp[k];
  }
  fftPow2(aRe, aIm);
  for (let k = 0; k < m; k++) {
    const tr = aRe[k] * fbRe[k] - aIm[k] * fbIm[k];
    aIm[k] = aRe[k] * fbIm[k] + aIm[k] * fbRe[k];
    aRe[k] = tr;
  }
  // inverse FFT of the product via conjugation
  for (let k = 0; k < m; k++) aIm[k] = -aIm[k];
  fftPow2(aRe, aIm);
  const outRe = new Float64Array(n);
  const outIm = new Float64Array(n);
  for (let k = 0; k < n; k++) {
    const br = aRe[k] / m;
    const bi = -aIm[k] / m;
    outRe[k] = br * cosChirp[k] + bi * sinChirp[k];
    outIm[k] = bi * cosChirp[k] - br * sinChirp[k];
  }
  return [outRe, outIm];
}

/** Magnitude of the one-sided spectrum of a real frame (n/2 + 1 bins). */
export function rfftMagnitude(x: Float64Array): Float64Array {
  const n = x.length;
  const [re, im] = fft(x, new Float64Array(n));
  const bins = Math.floor(n / 2) + 1;
  const out = new Float64Array(bins);
  for (let k = 0; k < bins; k++) out[k] = Math.hypot(re[k], im[k]);
  return out;
}
