// Population count of each word by clearing the lowest set bit; returns the total.
int popcount(unsigned* x, int* c, int n) {
    int total = 0;
    for (int i = 0; i < n; i++) {
        unsigned v = x[i];
        int k = 0;
        while (v != 0) {
            v = v & (v - 1);
            k++;
        }
        c[i] = k;
        total += k;
    }
    return total;
}
