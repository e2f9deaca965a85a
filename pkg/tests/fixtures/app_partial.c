/*
 * Encryption loop in a house style: the round key lives in a 2-D table
 * indexed [round][byte] instead of the flat layout the pattern uses,
 * and the column mix is inlined at the call site. Close to the cipher
 * pattern, but not identical.
 */

static void encrypt_payload(unsigned char *state,
                            const unsigned char *sbox,
                            const unsigned char rk[11][16], int rounds)
{
    int r;
    int b;

    for (r = 1; r < rounds; r = r + 1) {
        for (b = 0; b < 16; b = b + 1) {
            state[b] = sbox[state[b]] ^ rk[r][b];
        }
        state[0] = state[0] ^ state[5];
    }
}

int main(void)
{
    unsigned char payload[16];
    unsigned char sbox[256];
    unsigned char rk[11][16];

    encrypt_payload(payload, sbox, rk, 11);
    return 0;
}
