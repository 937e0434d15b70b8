// Bitwise reflected CRC-32 (polynomial 0xEDB88320).
unsigned crc32(unsigned char* data, int n) {
    unsigned crc = 0xFFFFFFFF;
    for (int i = 0; i < n; i++) {
        crc = crc ^ data[i];
        for (int b = 0; b < 8; b++) {
            unsigned m = 0 - (crc & 1);
            crc = (crc >> 1) ^ (0xEDB88320 & m);
        }
    }
    return ~crc;
}
