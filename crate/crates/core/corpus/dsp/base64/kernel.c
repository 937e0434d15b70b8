// Base64 encoding with padding; returns the number of output bytes.
int base64(unsigned char* in, unsigned char* out, int n) {
    unsigned char tab[64] = {
        65, 66, 67, 68, 69, 70, 71, 72, 73, 74, 75, 76, 77, 78, 79, 80,
        81, 82, 83, 84, 85, 86, 87, 88, 89, 90, 97, 98, 99, 100, 101, 102,
        103, 104, 105, 106, 107, 108, 109, 110, 111, 112, 113, 114, 115, 116, 117, 118,
        119, 120, 121, 122, 48, 49, 50, 51, 52, 53, 54, 55, 56, 57, 43, 47
    };
    int o = 0;
    for (int i = 0; i < n; i += 3) {
        unsigned b0 = in[i];
        unsigned b1 = i + 1 < n ? in[i + 1] : 0;
        unsigned b2 = i + 2 < n ? in[i + 2] : 0;
        unsigned v = (b0 << 16) | (b1 << 8) | b2;
        out[o] = tab[(v >> 18) & 63];
        out[o + 1] = tab[(v >> 12) & 63];
        out[o + 2] = i + 1 < n ? tab[(v >> 6) & 63] : 61;
        out[o + 3] = i + 2 < n ? tab[v & 63] : 61;
        o += 4;
    }
    return o;
}
