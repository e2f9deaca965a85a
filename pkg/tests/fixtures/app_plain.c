/* Plain bookkeeping program with nothing worth offloading. */

static int checksum(const char *text, int count)
{
    int total = 0;
    int i;

    for (i = 0; i < count; i++) {
        total = (total * 31 + text[i]) % 65521;
    }
    return total;
}

static void reverse(char *text, int count)
{
    int left = 0;
    int right = count - 1;

    while (left < right) {
        char swap = text[left];
        text[left] = text[right];
        text[right] = swap;
        left++;
        right--;
    }
}

int main(void)
{
    char label[32] = "inventory-ledger";
    int digest;

    reverse(label, 16);
    digest = checksum(label, 16);
    if (digest == 0) {
        return 1;
    }
    return 0;
}
