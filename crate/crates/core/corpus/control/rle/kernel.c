// Run-length encoding into (count, value) byte pairs; returns output bytes.
int rle(unsigned char* in, unsigned char* out, int n) {
    int o = 0;
    int i = 0;
    while (i < n) {
        unsigned char v = in[i];
        int run = 1;
        while (i + run < n && in[i + run] == v && run < 255) run++;
        out[o] = (unsigned char)run;
        out[o + 1] = v;
        o += 2;
        i += run;
    }
    return o;
}
