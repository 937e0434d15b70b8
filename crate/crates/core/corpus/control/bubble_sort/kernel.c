// In-place ascending bubble sort.
void bubble_sort(int* a, int n) {
    for (int i = 0; i + 1 < n; i++) {
        for (int j = 0; j + 1 < n - i; j++) {
            int x = a[j];
            int y = a[j + 1];
            if (x > y) {
                a[j] = y;
                a[j + 1] = x;
            }
        }
    }
}
