// 8-tap FIR filter.
void fir(short* x, short* h, int* y, int n) {
    for (int i = 0; i < n; i++) {
        int acc = 0;
        for (int t = 0; t < 8; t++) {
            if (i - t >= 0) acc += x[i - t] * h[t];
        }
        y[i] = acc;
    }
}
