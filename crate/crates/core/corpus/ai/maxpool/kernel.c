// 2x2 max-pooling with stride 2 over a w x h 8-bit feature map.
unsigned char max2(unsigned char a, unsigned char b) { return a > b ? a : b; }

void maxpool(unsigned char* in, unsigned char* out, int w, int h) {
    for (int y = 0; y + 1 < h; y += 2) {
        for (int x = 0; x + 1 < w; x += 2) {
            int p = y * w + x;
            out[(y >> 1) * (w >> 1) + (x >> 1)] = max2(max2(in[p], in[p + 1]), max2(in[p + w], in[p + w + 1]));
        }
    }
}
