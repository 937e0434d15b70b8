// Euclid's algorithm on pairs of 16-bit operands.
void gcd(unsigned short* a, unsigned short* b, unsigned short* g, int n) {
    for (int i = 0; i < n; i++) {
        unsigned short x = a[i];
        unsigned short y = b[i];
        while (y != 0) {
            unsigned short t = y;
            y = x % y;
            x = t;
        }
        g[i] = x;
    }
}
