// 64-bit dot product of 32-bit vectors.
long dot(int* a, int* b, int n) {
    long s = 0;
    for (int i = 0; i < n; i++) s += (long)a[i] * b[i];
    return s;
}
