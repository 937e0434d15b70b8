// Sobel gradient magnitude |gx| + |gy|, saturated to 255.
int absdiff(int v) { return v < 0 ? -v : v; }

void sobel(unsigned char* in, unsigned char* out, int w, int h) {
    for (int y = 1; y + 1 < h; y++) {
        for (int x = 1; x + 1 < w; x++) {
            int p = y * w + x;
            int gx = in[p - w + 1] + 2 * in[p + 1] + in[p + w + 1]
                   - in[p - w - 1] - 2 * in[p - 1] - in[p + w - 1];
            int gy = in[p + w - 1] + 2 * in[p + w] + in[p + w + 1]
                   - in[p - w - 1] - 2 * in[p - w] - in[p - w + 1];
            int m = absdiff(gx) + absdiff(gy);
            out[p] = (unsigned char)(m > 255 ? 255 : m);
        }
    }
}
