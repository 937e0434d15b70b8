// Accumulator saturating to the 16-bit signed range after every sample.
short sat_acc(short* x, int n) {
    int s = 0;
    for (int i = 0; i < n; i++) {
        s = s + x[i];
        if (s > 32767) s = 32767;
        if (s < -32768) s = -32768;
    }
    return (short)s;
}
