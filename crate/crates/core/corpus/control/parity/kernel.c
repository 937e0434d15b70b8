// Parity of each 64-bit word by an xor-folding tree; returns the number of odd words.
int parity(unsigned long* x, unsigned char* p, int n) {
    int odd = 0;
    for (int i = 0; i < n; i++) {
        unsigned long v = x[i];
        v = v ^ (v >> 32);
        v = v ^ (v >> 16);
        v = v ^ (v >> 8);
        v = v ^ (v >> 4);
        v = v ^ (v >> 2);
        v = v ^ (v >> 1);
        p[i] = (unsigned char)(v & 1);
        odd += (int)(v & 1);
    }
    return odd;
}
