# Independent ChaCha8 + Box-Muller reference for the pinned sampler draws.
import struct, math
M=0xffffffff
def rotl(x,n): return ((x<<n)|(x>>(32-n)))&M
def qr(s,a,b,c,d):
    s[a]=(s[a]+s[b])&M; s[d]=rotl(s[d]^s[a],16)
    s[c]=(s[c]+s[d])&M; s[b]=rotl(s[b]^s[c],12)
    s[a]=(s[a]+s[b])&M; s[d]=rotl(s[d]^s[a],8)
    s[c]=(s[c]+s[d])&M; s[b]=rotl(s[b]^s[c],7)
def block(key,counter,stream,rounds=8):
    st=[0x61707865,0x3320646e,0x79622d32,0x6b206574]+list(struct.unpack('<8I',key))+[counter&M,counter>>32,stream&M,stream>>32]
    w=st[:]
    for _ in range(rounds//2):
        qr(w,0,4,8,12);qr(w,1,5,9,13);qr(w,2,6,10,14);qr(w,3,7,11,15)
        qr(w,0,5,10,15);qr(w,1,6,11,12);qr(w,2,7,8,13);qr(w,3,4,9,14)
    return [(x+y)&M for x,y in zip(w,st)]
def seed_from_u64(state):
    MUL=6364136223846793005; INC=11634580027462260723; out=b''
    for _ in range(8):
        state=(state*MUL+INC)&0xffffffffffffffff
        xs=(((state>>18)^state)>>27)&M; rot=state>>59
        x=((xs>>rot)|(xs<<((32-rot)&31)))&M
        out+=struct.pack('<I',x)
    return out
def u64s(seed,n,stream=0):
    key=seed_from_u64(seed); words=[]
    c=0
    while len(words)<2*n: words+=block(key,c,stream); c+=1
    return [words[2*i]|(words[2*i+1]<<32) for i in range(n)]
def normals(seed,n):
    xs=u64s(seed,n); out=[]
    for i in range(0,n,2):
        u=((xs[i]>>11)+1)*2.0**-53; v=(xs[i+1]>>11)*2.0**-53
        r=math.sqrt(-2*math.log(u)); a=2*math.pi*v
        out+=[r*math.cos(a), r*math.sin(a)]
    return out
print([repr(x) for x in normals(0,4)])
