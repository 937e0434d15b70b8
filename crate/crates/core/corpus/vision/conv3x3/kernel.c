// 3x3 convolution over a w x h 8-bit image; valid region only.
void conv3x3(unsigned char* img, short* k, int* out, int w, int h) {
    for (int y = 0; y + 2 < h; y++) {
        for (int x = 0; x + 2 < w; x++) {
            int acc = 0;
            for (int i = 0; i < 3; i++) {
                for (int j = 0; j < 3; j++) {
                    acc += img[(y + i) * w + x + j] * k[i * 3 + j];
                }
            }
            out[y * (w - 2) + x] = acc;
        }
    }
}
