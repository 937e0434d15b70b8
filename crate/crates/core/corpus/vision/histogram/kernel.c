// 16-bin grayscale histogram accumulated in on-chip memory.
void histogram(unsigned char* img, unsigned* hist, int n) {
    unsigned bins[16];
    for (int i = 0; i < 16; i++) bins[i] = 0;
    for (int i = 0; i < n; i++) {
        int b = img[i] >> 4;
        bins[b] = bins[b] + 1;
    }
    for (int i = 0; i < 16; i++) hist[i] = bins[i];
}
